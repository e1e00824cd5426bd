#pragma once

#include <string>

#include "ffd/config.hpp"
#include "ffd/feedback.hpp"
#include "ffd/kb.hpp"

namespace ffd {

// Canonical artifact locations under the configured directories.
struct SplitArtifacts {
    std::string train;
    std::string valid;
    std::string test;
    std::string heads;
};

SplitArtifacts split_paths(const RunConfig& cfg);
std::string ae_model_path(const RunConfig& cfg, Role role);
std::string kbr_model_path(const RunConfig& cfg, KbrKind kind);
std::string loss_trace_path(const std::string& model_path);

// "ffd:analogy" -> "ffd_analogy", "kbr+:distmult" -> "kbrplus_distmult"
std::string method_file_tag(const std::string& method);
std::string discovered_path(const RunConfig& cfg, const std::string& method);

// Split the configured input triple file and write the four split files.
SplitArtifacts cmd_split(const RunConfig& cfg);

KbSplit load_split_artifacts(const RunConfig& cfg);

// component: ae-head | ae-tail | kbr:<kind>. Persists the model plus an
// epoch,loss trace CSV next to it; returns the model path. With resume, the
// existing file is loaded and training continues from its parameters.
std::string cmd_train(const RunConfig& cfg, const std::string& component,
                      bool resume = false);

// method: ffd:<kind> | kbr+:<kind> | svd | nmf. Writes the discovered-facts
// TSV and returns its path.
std::string cmd_discover(const RunConfig& cfg, const std::string& method);

struct EvalArtifacts {
    EvalReport report;
    std::string report_path;
    std::string per_head_path;
    std::string buckets_path;
};

EvalArtifacts cmd_eval(const RunConfig& cfg, const std::string& facts_file);

struct FeedbackArtifacts {
    std::string audit_path;
    std::string trace_path;
    std::string facts_path;   // final discovery TSV
    FeedbackLoopResult result;
};

FeedbackArtifacts cmd_feedback(const RunConfig& cfg);

// Nested sparsity sweep over cfg.sweep_ratios; returns the CSV path.
std::string cmd_sweep(const RunConfig& cfg);

// Human-readable top-K listing for one head label; writes the table under
// out_dir and returns the rendered text.
std::string cmd_case(const RunConfig& cfg, const std::string& head_label);

}  // namespace ffd
