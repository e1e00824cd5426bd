#include "ffd/feedback.hpp"

#include <algorithm>
#include <sstream>
#include <string>

#include "ffd/util.hpp"

namespace ffd {

RetrainTarget parse_retrain_target(const std::string& name) {
    if (name == "ae") return RetrainTarget::ae;
    if (name == "kbr") return RetrainTarget::kbr;
    if (name == "both") return RetrainTarget::both;
    throw ConfigError("unknown retrain target '" + name + "' (expected ae, kbr or both)");
}

std::string retrain_target_name(RetrainTarget target) {
    switch (target) {
        case RetrainTarget::ae: return "ae";
        case RetrainTarget::kbr: return "kbr";
        case RetrainTarget::both: return "both";
    }
    throw ConfigError("invalid retrain target");
}

namespace {

void check_feedback_config(const FeedbackConfig& cfg) {
    if (cfg.n_fb < 1) throw ConfigError("feedback n_fb must be >= 1");
    if (cfg.rounds < 1) throw ConfigError("feedback rounds must be >= 1");
}

bool promote_before(const ScoredFact& a, const ScoredFact& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.triple.h != b.triple.h) return a.triple.h < b.triple.h;
    if (a.triple.r != b.triple.r) return a.triple.r < b.triple.r;
    return a.triple.t < b.triple.t;
}

// Train components from scratch on the given store. Seeds are derived from
// the round label so every round is reproducible on its own.
void retrain_components(FeedbackState& state, RetrainTarget target, int round,
                        const AeTrainConfig& ae_cfg, const KbrTrainConfig& kbr_cfg) {
    const std::string tag = "feedback:" + std::to_string(round);
    if (target == RetrainTarget::ae || target == RetrainTarget::both) {
        AeTrainConfig head_cfg = ae_cfg;
        head_cfg.seed = derive_seed(ae_cfg.seed, tag + ":ae:head");
        state.comps.head_ae =
            train_autoencoder(collect_profiles(state.train, Role::head), head_cfg).params;
        AeTrainConfig tail_cfg = ae_cfg;
        tail_cfg.seed = derive_seed(ae_cfg.seed, tag + ":ae:tail");
        state.comps.tail_ae =
            train_autoencoder(collect_profiles(state.train, Role::tail), tail_cfg).params;
    }
    if (target == RetrainTarget::kbr || target == RetrainTarget::both) {
        KbrTrainConfig k_cfg = kbr_cfg;
        k_cfg.seed = derive_seed(kbr_cfg.seed, tag + ":kbr");
        state.comps.kbr = train_kbr(state.train, k_cfg).model;
    }
}

}  // namespace

FeedbackRoundOutput feedback_round(FeedbackState& state, const std::vector<int>& heads,
                                   const DiscoveryConfig& disc_cfg,
                                   const FeedbackConfig& fb_cfg,
                                   const AeTrainConfig& ae_cfg,
                                   const KbrTrainConfig& kbr_cfg) {
    check_feedback_config(fb_cfg);
    state.round += 1;

    FeedbackRoundOutput out;
    out.discovered = discover_all(heads, state.comps.head_ae, state.comps.tail_ae,
                                  state.comps.kbr, state.train, disc_cfg);
    if (out.discovered.empty())
        throw FeedbackError("feedback round " + std::to_string(state.round) +
                            ": discovery produced no facts to feed back");

    const std::size_t n_sel =
        std::min<std::size_t>(static_cast<std::size_t>(fb_cfg.n_fb), out.discovered.size());
    std::vector<ScoredFact> pool = out.discovered;
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_sel),
                      pool.end(), promote_before);
    pool.resize(n_sel);
    out.fed_back = std::move(pool);

    std::vector<Triple> facts = state.train.facts();
    const std::size_t before = facts.size();
    std::size_t fresh = 0;
    for (const ScoredFact& sf : out.fed_back) {
        if (!state.train.contains(sf.triple.h, sf.triple.r, sf.triple.t)) ++fresh;
        facts.push_back(sf.triple);
    }
    state.train = TripleStore(state.train.vocab_ptr(), std::move(facts));
    out.added = state.train.size() - before;
    if (out.added != fresh)
        throw StateError("feedback bookkeeping out of sync with the triple store");

    retrain_components(state, fb_cfg.retrain, state.round, ae_cfg, kbr_cfg);
    return out;
}

FeedbackLoopResult feedback_loop(const KbSplit& split, const FfdComponents& initial,
                                 const DiscoveryConfig& disc_cfg,
                                 const FeedbackConfig& fb_cfg,
                                 const AeTrainConfig& ae_cfg,
                                 const KbrTrainConfig& kbr_cfg) {
    check_feedback_config(fb_cfg);
    if (!initial.head_ae.trained() || !initial.tail_ae.trained() || !initial.kbr.trained())
        throw StateError("feedback loop needs trained components to start from");

    FeedbackState state{split.train, initial, 0};
    FeedbackLoopResult result;

    for (int round = 1; round <= fb_cfg.rounds; ++round) {
        const std::size_t train_before = state.train.size();
        FeedbackRoundOutput out =
            feedback_round(state, split.heads, disc_cfg, fb_cfg, ae_cfg, kbr_cfg);

        for (const ScoredFact& sf : out.fed_back) result.audit.emplace_back(round, sf);

        EvalReport report = evaluate(out.discovered, split.test, split.train);
        FeedbackRoundTrace row;
        row.round = round;
        row.train_size = train_before;
        row.discovered = out.discovered.size();
        row.fed_back = out.fed_back.size();
        row.added = out.added;
        row.map = report.map;
        row.precision = report.precision;
        row.recall = report.recall;
        row.f1 = report.f1;
        result.trace.push_back(row);
    }

    result.final_discovery = discover_all(split.heads, state.comps.head_ae,
                                          state.comps.tail_ae, state.comps.kbr,
                                          state.train, disc_cfg);
    result.comps = std::move(state.comps);
    result.final_train = std::move(state.train);
    return result;
}

std::string audit_tsv(const std::vector<std::pair<int, ScoredFact>>& audit,
                      const Vocab& vocab) {
    std::ostringstream os;
    os << "round\thead\trelation\ttail\tconfidence\n";
    for (const auto& [round, sf] : audit) {
        os << round << '\t' << vocab.entity_label(sf.triple.h) << '\t'
           << vocab.relation_label(sf.triple.r) << '\t' << vocab.entity_label(sf.triple.t)
           << '\t' << format_g12(sf.confidence) << '\n';
    }
    return os.str();
}

}  // namespace ffd
