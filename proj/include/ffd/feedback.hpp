#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ffd/autoencoder.hpp"
#include "ffd/discovery.hpp"
#include "ffd/eval.hpp"
#include "ffd/kb.hpp"
#include "ffd/kbr.hpp"

namespace ffd {

// Which of the trained components get rebuilt after facts are fed back.
enum class RetrainTarget { ae, kbr, both };

RetrainTarget parse_retrain_target(const std::string& name);
std::string retrain_target_name(RetrainTarget target);

struct FeedbackConfig {
    int n_fb = 20000;      // global cap on facts fed back per round
    int rounds = 2;
    RetrainTarget retrain = RetrainTarget::both;
};

// The three trained pieces the discovery scorer needs.
struct FfdComponents {
    AutoencoderParams head_ae;
    AutoencoderParams tail_ae;
    KbrModel kbr;
};

// Working state threaded through rounds: the augmented training store and
// the components trained on it.
struct FeedbackState {
    TripleStore train;
    FfdComponents comps;
    int round = 0;  // rounds completed so far
};

struct FeedbackRoundOutput {
    std::vector<ScoredFact> discovered;   // full discovery used for selection
    std::vector<ScoredFact> fed_back;     // the slice promoted into train
    std::size_t added = 0;                // how many were actually new
};

// One round: discover for all heads, promote the global top n_fb facts by
// confidence into the training store, retrain the selected components from
// scratch. Throws FeedbackError when discovery comes back empty.
FeedbackRoundOutput feedback_round(FeedbackState& state, const std::vector<int>& heads,
                                   const DiscoveryConfig& disc_cfg,
                                   const FeedbackConfig& fb_cfg,
                                   const AeTrainConfig& ae_cfg,
                                   const KbrTrainConfig& kbr_cfg);

struct FeedbackRoundTrace {
    int round = 0;
    std::size_t train_size = 0;     // before this round's additions
    std::size_t discovered = 0;
    std::size_t fed_back = 0;
    std::size_t added = 0;
    double map = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct FeedbackLoopResult {
    FfdComponents comps;                 // components after the last retrain
    TripleStore final_train;
    std::vector<ScoredFact> final_discovery;   // fresh discovery on final state
    std::vector<std::pair<int, ScoredFact>> audit;  // (round, promoted fact)
    std::vector<FeedbackRoundTrace> trace;          // one row per round
};

// Runs fb_cfg.rounds rounds against split.heads, never touching valid or
// test, then a final discovery pass with the finished components. Round
// metrics in the trace score that round's discovery against split.test.
FeedbackLoopResult feedback_loop(const KbSplit& split, const FfdComponents& initial,
                                 const DiscoveryConfig& disc_cfg,
                                 const FeedbackConfig& fb_cfg,
                                 const AeTrainConfig& ae_cfg,
                                 const KbrTrainConfig& kbr_cfg);

// TSV audit trail: round, head, relation, tail, confidence per promoted fact.
std::string audit_tsv(const std::vector<std::pair<int, ScoredFact>>& audit,
                      const Vocab& vocab);

}  // namespace ffd
