#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ffd/autoencoder.hpp"
#include "ffd/discovery.hpp"
#include "ffd/eval.hpp"
#include "ffd/feedback.hpp"
#include "ffd/kbr.hpp"

namespace ffd {

// Everything a pipeline run needs, loaded from a flat key = value file.
// Component seeds are not stored here; they are derived from the global seed
// with fixed labels at the point of use.
struct RunConfig {
    std::uint64_t seed = 7;
    int threads = 0;  // 0 = all available

    struct Paths {
        std::string data_dir = "data";
        std::string model_dir = "models";
        std::string out_dir = "out";
        std::string all_facts;  // input triples for cmd_split
    } paths;

    struct Split {
        double ratio = 50.0;         // percent of each test head's relations kept in train
        int num_heads = 2000;
        double valid_fraction = 1.0;  // validation heads as a fraction of num_heads
    } split;

    AeTrainConfig ae;
    KbrTrainConfig kbr;
    bool kbr_loss_explicit = false;  // false: loss follows the model kind

    DiscoveryConfig discovery;
    FeedbackConfig feedback;

    struct Mf {
        int rank = 100;
        int min_count = 3;
        int nmf_iters = 200;
    } mf;

    struct Eval {
        bool micro = false;
        std::vector<double> bins = kDefaultDifficultyBins;
    } eval;

    std::vector<double> sweep_ratios = {50, 40, 30, 20, 10};
};

// Apply one dotted-key setting ("kbr.dim", "200"). Unknown keys and
// malformed values throw ConfigError naming the key.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Parse flat config text: one key = value per line, # starts a comment,
// blank lines ignored. Errors carry the 1-based line number.
void apply_config_text(RunConfig& cfg, const std::string& text);

RunConfig load_config_file(const std::string& path);

// FFD_DATA_DIR / FFD_MODEL_DIR / FFD_OUT_DIR override the corresponding
// paths; no other key is reachable from the environment.
void apply_env_overrides(RunConfig& cfg);

// Rejects every out-of-range field before any compute starts.
void validate_config(const RunConfig& cfg);

// The KBR training config for a concrete kind, with the loss resolved to the
// kind's default unless the config pinned one explicitly.
KbrTrainConfig kbr_config_for(const RunConfig& cfg, KbrKind kind);

// Round-trippable dump of every setting, in schema order.
std::string config_text(const RunConfig& cfg);

}  // namespace ffd
