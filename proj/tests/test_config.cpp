#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>

#include "ffd/config.hpp"
#include "ffd/util.hpp"

using namespace ffd;
namespace fs = std::filesystem;

namespace {

std::string error_text(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("defaults dump and reparse to the same text") {
    RunConfig cfg;
    const std::string text = config_text(cfg);
    CHECK(text.find("kbr.loss") == std::string::npos);  // loss not pinned by default

    RunConfig back;
    apply_config_text(back, text);
    CHECK(config_text(back) == text);
    CHECK_FALSE(back.kbr_loss_explicit);
    CHECK(back.paths.all_facts.empty());
}

TEST_CASE("every key reaches its field") {
    const std::string text =
        "seed = 99\n"
        "threads = 3\n"
        "paths.data_dir = d\n"
        "paths.model_dir = m\n"
        "paths.out_dir = o\n"
        "paths.all_facts = facts.tsv\n"
        "split.ratio = 25\n"
        "split.num_heads = 7\n"
        "split.valid_fraction = 0.5\n"
        "ae.d1 = 16\n"
        "ae.corruption_rate = 0.1\n"
        "ae.epochs = 5\n"
        "ae.learning_rate = 0.02\n"
        "ae.batch_size = 32\n"
        "kbr.kind = distmult\n"
        "kbr.dim = 12\n"
        "kbr.epochs = 9\n"
        "kbr.learning_rate = 0.03\n"
        "kbr.batch_size = 64\n"
        "kbr.negatives = 5\n"
        "kbr.loss = logistic\n"
        "kbr.margin = 2.5\n"
        "kbr.l2 = 0.001\n"
        "kbr.patience = 4\n"
        "discovery.n_h = 6\n"
        "discovery.n_t = 11\n"
        "discovery.n_f = 5\n"
        "discovery.k_bar = 13\n"
        "discovery.lambda1 = 0.5\n"
        "discovery.lambda2 = 0.25\n"
        "discovery.lambda3 = 2\n"
        "discovery.exclude_known = false\n"
        "discovery.cache_scope = per_head\n"
        "feedback.n_fb = 17\n"
        "feedback.rounds = 3\n"
        "feedback.retrain = kbr\n"
        "mf.rank = 8\n"
        "mf.min_count = 2\n"
        "mf.nmf_iters = 40\n"
        "eval.micro = yes\n"
        "eval.bins = 0.5,2,4\n"
        "sweep.ratios = 50,10\n";

    RunConfig cfg;
    apply_config_text(cfg, text);
    CHECK(cfg.seed == 99);
    CHECK(cfg.threads == 3);
    CHECK(cfg.paths.data_dir == "d");
    CHECK(cfg.paths.model_dir == "m");
    CHECK(cfg.paths.out_dir == "o");
    CHECK(cfg.paths.all_facts == "facts.tsv");
    CHECK(cfg.split.ratio == 25.0);
    CHECK(cfg.split.num_heads == 7);
    CHECK(cfg.split.valid_fraction == 0.5);
    CHECK(cfg.ae.d1 == 16);
    CHECK(cfg.ae.corruption_rate == 0.1);
    CHECK(cfg.ae.epochs == 5);
    CHECK(cfg.ae.learning_rate == 0.02);
    CHECK(cfg.ae.batch_size == 32);
    CHECK(cfg.kbr.kind == KbrKind::distmult);
    CHECK(cfg.kbr.dim == 12);
    CHECK(cfg.kbr.epochs == 9);
    CHECK(cfg.kbr.learning_rate == 0.03);
    CHECK(cfg.kbr.batch_size == 64);
    CHECK(cfg.kbr.negatives_per_positive == 5);
    CHECK(cfg.kbr.loss == KbrLoss::logistic);
    CHECK(cfg.kbr_loss_explicit);
    CHECK(cfg.kbr.margin == 2.5);
    CHECK(cfg.kbr.l2 == 0.001);
    CHECK(cfg.kbr.patience == 4);
    CHECK(cfg.discovery.n_h == 6);
    CHECK(cfg.discovery.n_t == 11);
    CHECK(cfg.discovery.n_f == 5);
    CHECK(cfg.discovery.k_bar == 13);
    CHECK(cfg.discovery.lambda1 == 0.5);
    CHECK(cfg.discovery.lambda2 == 0.25);
    CHECK(cfg.discovery.lambda3 == 2.0);
    CHECK_FALSE(cfg.discovery.exclude_known);
    CHECK(cfg.discovery.cache_scope == DiscoveryConfig::CacheScope::per_head);
    CHECK(cfg.feedback.n_fb == 17);
    CHECK(cfg.feedback.rounds == 3);
    CHECK(cfg.feedback.retrain == RetrainTarget::kbr);
    CHECK(cfg.mf.rank == 8);
    CHECK(cfg.mf.min_count == 2);
    CHECK(cfg.mf.nmf_iters == 40);
    CHECK(cfg.eval.micro);
    CHECK(cfg.eval.bins == std::vector<double>{0.5, 2.0, 4.0});
    CHECK(cfg.sweep_ratios == std::vector<double>{50.0, 10.0});

    // explicit loss survives a dump and reload
    const std::string dumped = config_text(cfg);
    CHECK(dumped.find("kbr.loss = logistic\n") != std::string::npos);
    RunConfig back;
    apply_config_text(back, dumped);
    CHECK(config_text(back) == dumped);
}

TEST_CASE("comments blank lines and crlf endings parse cleanly") {
    RunConfig cfg;
    apply_config_text(cfg,
                      "# a full comment line\r\n"
                      "\r\n"
                      "  seed = 42   # trailing note\r\n"
                      "   threads   =    2\n"
                      "paths.data_dir = some/dir\n");
    CHECK(cfg.seed == 42);
    CHECK(cfg.threads == 2);
    CHECK(cfg.paths.data_dir == "some/dir");
}

TEST_CASE("parse failures carry the line number and the key") {
    RunConfig cfg;
    const std::string unknown = error_text(
        [&] { apply_config_text(cfg, "seed = 1\nno.such.key = 2\n"); });
    CHECK(unknown.find("config line 2") != std::string::npos);
    CHECK(unknown.find("no.such.key") != std::string::npos);

    const std::string noeq =
        error_text([&] { apply_config_text(cfg, "seed = 1\n\njust words\n"); });
    CHECK(noeq.find("config line 3") != std::string::npos);

    CHECK_THROWS_AS(apply_setting(cfg, "threads", "12x"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "split.ratio", "fast"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "seed", "abc"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "eval.micro", "maybe"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "eval.bins", "1,,2"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "eval.bins", ""), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "kbr.kind", "transE"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "kbr.loss", "hinge"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "discovery.cache_scope", "global"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "feedback.retrain", "none"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "", "1"), ConfigError);
}

TEST_CASE("only the three path variables come from the environment") {
    RunConfig cfg;
    setenv("FFD_DATA_DIR", "env_data", 1);
    setenv("FFD_OUT_DIR", "env_out", 1);
    unsetenv("FFD_MODEL_DIR");
    setenv("FFD_SEED", "123", 1);  // not a recognized override
    apply_env_overrides(cfg);
    CHECK(cfg.paths.data_dir == "env_data");
    CHECK(cfg.paths.out_dir == "env_out");
    CHECK(cfg.paths.model_dir == "models");
    CHECK(cfg.seed == 7);
    unsetenv("FFD_DATA_DIR");
    unsetenv("FFD_OUT_DIR");
    unsetenv("FFD_SEED");

    // environment beats the file for the paths it names
    RunConfig layered;
    apply_config_text(layered, "paths.data_dir = from_file\n");
    setenv("FFD_DATA_DIR", "from_env", 1);
    apply_env_overrides(layered);
    CHECK(layered.paths.data_dir == "from_env");
    unsetenv("FFD_DATA_DIR");
}

TEST_CASE("validation rejects each out-of-range field") {
    RunConfig ok;
    CHECK_NOTHROW(validate_config(ok));

    auto rejects = [](const std::function<void(RunConfig&)>& mutate) {
        RunConfig c;
        mutate(c);
        CHECK_THROWS_AS(validate_config(c), ConfigError);
    };

    rejects([](RunConfig& c) { c.threads = -1; });
    rejects([](RunConfig& c) { c.paths.out_dir = ""; });
    rejects([](RunConfig& c) { c.split.ratio = 0.0; });
    rejects([](RunConfig& c) { c.split.ratio = 100.5; });
    rejects([](RunConfig& c) { c.split.num_heads = 0; });
    rejects([](RunConfig& c) { c.split.valid_fraction = -0.1; });
    rejects([](RunConfig& c) { c.ae.d1 = 0; });
    rejects([](RunConfig& c) { c.ae.corruption_rate = 1.0; });
    rejects([](RunConfig& c) { c.ae.epochs = 0; });
    rejects([](RunConfig& c) { c.ae.learning_rate = 0.0; });
    rejects([](RunConfig& c) { c.ae.batch_size = 0; });
    rejects([](RunConfig& c) { c.kbr.dim = 0; });
    rejects([](RunConfig& c) { c.kbr.dim = 7; });  // analogy needs an even dim
    rejects([](RunConfig& c) { c.kbr.epochs = 0; });
    rejects([](RunConfig& c) { c.kbr.learning_rate = 0.0; });
    rejects([](RunConfig& c) { c.kbr.batch_size = 0; });
    rejects([](RunConfig& c) { c.kbr.negatives_per_positive = 0; });
    rejects([](RunConfig& c) { c.kbr.margin = 0.0; });
    rejects([](RunConfig& c) { c.kbr.l2 = -0.5; });
    rejects([](RunConfig& c) { c.kbr.patience = -1; });
    rejects([](RunConfig& c) { c.discovery.n_h = 0; });
    rejects([](RunConfig& c) { c.discovery.n_f = c.discovery.n_t + 1; });
    rejects([](RunConfig& c) { c.discovery.k_bar = 0; });
    rejects([](RunConfig& c) { c.discovery.lambda2 = 1.0 / 0.0; });
    rejects([](RunConfig& c) { c.feedback.n_fb = 0; });
    rejects([](RunConfig& c) { c.feedback.rounds = 0; });
    rejects([](RunConfig& c) { c.mf.rank = 0; });
    rejects([](RunConfig& c) { c.mf.min_count = -1; });
    rejects([](RunConfig& c) { c.mf.nmf_iters = 0; });
    rejects([](RunConfig& c) { c.eval.bins = {}; });
    rejects([](RunConfig& c) { c.eval.bins = {1.0, 1.0}; });
    rejects([](RunConfig& c) { c.sweep_ratios = {}; });
    rejects([](RunConfig& c) { c.sweep_ratios = {50.0, 0.0}; });

    // an odd dim is fine for the one kind that allows it
    RunConfig odd;
    odd.kbr.kind = KbrKind::distmult;
    odd.kbr.dim = 7;
    CHECK_NOTHROW(validate_config(odd));
}

TEST_CASE("the kbr loss follows the kind unless pinned") {
    RunConfig cfg;
    CHECK(kbr_config_for(cfg, KbrKind::distmult).loss == KbrLoss::margin);
    CHECK(kbr_config_for(cfg, KbrKind::complex_).loss == KbrLoss::logistic);
    CHECK(kbr_config_for(cfg, KbrKind::analogy).loss == KbrLoss::logistic);
    CHECK(kbr_config_for(cfg, KbrKind::distmult).kind == KbrKind::distmult);

    apply_setting(cfg, "kbr.loss", "logistic");
    CHECK(kbr_config_for(cfg, KbrKind::distmult).loss == KbrLoss::logistic);

    RunConfig pinned;
    apply_setting(pinned, "kbr.loss", "margin");
    apply_setting(pinned, "kbr.dim", "24");
    KbrTrainConfig k = kbr_config_for(pinned, KbrKind::analogy);
    CHECK(k.loss == KbrLoss::margin);
    CHECK(k.dim == 24);
}

TEST_CASE("config files load from disk and missing ones fail loudly") {
    const fs::path dir = fs::temp_directory_path() / "ffd_config_test";
    fs::create_directories(dir);
    const fs::path file = dir / "run.conf";
    write_file_atomic(file.string(), "seed = 31\nkbr.kind = analogy\n");

    RunConfig cfg = load_config_file(file.string());
    CHECK(cfg.seed == 31);
    CHECK(cfg.kbr.kind == KbrKind::analogy);

    CHECK_THROWS_AS(load_config_file((dir / "absent.conf").string()), IoError);
    fs::remove_all(dir);
}
