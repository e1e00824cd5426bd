#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ffd/config.hpp"
#include "ffd/pipeline.hpp"
#include "ffd/util.hpp"

namespace {

void apply_set_overrides(ffd::RunConfig& cfg, const std::vector<std::string>& sets) {
    for (const std::string& kv : sets) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw ffd::ConfigError("--set expects key=value, got '" + kv + "'");
        ffd::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
}

std::vector<std::string> expand_components(const std::vector<std::string>& components) {
    std::vector<std::string> out;
    for (const std::string& c : components) {
        if (c == "all") {
            out.insert(out.end(), {"ae-head", "ae-tail", "kbr:distmult", "kbr:complex",
                                   "kbr:analogy"});
        } else {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fact facet decomposition: split, train, discover, evaluate"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    int threads = 0;
    std::uint64_t seed = 0;
    auto* opt_config =
        app.add_option("--config", config_path, "flat key = value config file");
    app.add_option("--set", sets, "override one config key, as key=value")
        ->allow_extra_args(false);
    auto* opt_threads = app.add_option("--threads", threads, "worker thread cap");
    auto* opt_seed = app.add_option("--seed", seed, "global seed");

    auto* sc_split = app.add_subcommand("split", "re-split a triple file");
    sc_split->fallthrough();

    std::vector<std::string> components;
    bool resume = false;
    auto* sc_train = app.add_subcommand("train", "train model components");
    sc_train
        ->add_option("component", components,
                     "ae-head | ae-tail | kbr:<kind> | all, in order")
        ->required();
    sc_train->add_flag("--resume", resume, "continue from the existing model file");
    sc_train->fallthrough();

    std::string method;
    auto* sc_discover = app.add_subcommand("discover", "rank new facts per head");
    sc_discover->add_option("method", method, "ffd:<kind> | kbr+:<kind> | svd | nmf")
        ->required();
    sc_discover->fallthrough();

    std::string facts_file;
    auto* sc_eval = app.add_subcommand("eval", "score a discovered-facts file");
    sc_eval->add_option("facts", facts_file, "discovered-facts TSV")->required();
    sc_eval->fallthrough();

    auto* sc_feedback = app.add_subcommand("feedback", "run the feedback loop");
    sc_feedback->fallthrough();

    auto* sc_sweep = app.add_subcommand("sweep", "sparsity sweep over split ratios");
    sc_sweep->fallthrough();

    std::string head_label;
    auto* sc_case = app.add_subcommand("case", "show the top facts for one head");
    sc_case->add_option("head", head_label, "head entity label")->required();
    sc_case->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        ffd::RunConfig cfg;
        if (opt_config->count()) cfg = ffd::load_config_file(config_path);
        ffd::apply_env_overrides(cfg);
        apply_set_overrides(cfg, sets);
        if (opt_threads->count()) cfg.threads = threads;
        if (opt_seed->count()) cfg.seed = seed;

        if (sc_split->parsed()) {
            const ffd::SplitArtifacts paths = ffd::cmd_split(cfg);
            std::cout << paths.train << "\n" << paths.valid << "\n" << paths.test << "\n"
                      << paths.heads << "\n";
        } else if (sc_train->parsed()) {
            for (const std::string& component : expand_components(components))
                std::cout << ffd::cmd_train(cfg, component, resume) << "\n";
        } else if (sc_discover->parsed()) {
            std::cout << ffd::cmd_discover(cfg, method) << "\n";
        } else if (sc_eval->parsed()) {
            const ffd::EvalArtifacts out = ffd::cmd_eval(cfg, facts_file);
            std::cout << ffd::report_text(out.report);
            std::cout << out.report_path << "\n" << out.per_head_path << "\n"
                      << out.buckets_path << "\n";
        } else if (sc_feedback->parsed()) {
            const ffd::FeedbackArtifacts out = ffd::cmd_feedback(cfg);
            std::cout << out.audit_path << "\n" << out.trace_path << "\n"
                      << out.facts_path << "\n";
        } else if (sc_sweep->parsed()) {
            std::cout << ffd::cmd_sweep(cfg) << "\n";
        } else if (sc_case->parsed()) {
            std::cout << ffd::cmd_case(cfg, head_label);
        }
        return 0;
    } catch (const ffd::FfdError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
