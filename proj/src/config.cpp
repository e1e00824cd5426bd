#include "ffd/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string_view>

#include "ffd/util.hpp"

namespace ffd {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " +
                      expected);
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) bad_value(key, value, "an integer");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(key, value, "an integer");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) bad_value(key, value, "a number");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(key, value, "a number");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) bad_value(key, value, "an unsigned integer");
        return static_cast<std::uint64_t>(v);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(key, value, "an unsigned integer");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    bad_value(key, value, "a boolean (true/false)");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) {
        const std::string x = trim(item);
        if (x.empty()) bad_value(key, value, "a comma-separated number list");
        out.push_back(parse_double(key, x));
    }
    if (out.empty()) bad_value(key, value, "a comma-separated number list");
    return out;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_g12(v[i]);
    }
    return out;
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    if (key.empty()) throw ConfigError("empty config key");

    if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "threads") cfg.threads = parse_int(key, value);

    else if (key == "paths.data_dir") cfg.paths.data_dir = value;
    else if (key == "paths.model_dir") cfg.paths.model_dir = value;
    else if (key == "paths.out_dir") cfg.paths.out_dir = value;
    else if (key == "paths.all_facts") cfg.paths.all_facts = value;

    else if (key == "split.ratio") cfg.split.ratio = parse_double(key, value);
    else if (key == "split.num_heads") cfg.split.num_heads = parse_int(key, value);
    else if (key == "split.valid_fraction") cfg.split.valid_fraction = parse_double(key, value);

    else if (key == "ae.d1") cfg.ae.d1 = parse_int(key, value);
    else if (key == "ae.corruption_rate") cfg.ae.corruption_rate = parse_double(key, value);
    else if (key == "ae.epochs") cfg.ae.epochs = parse_int(key, value);
    else if (key == "ae.learning_rate") cfg.ae.learning_rate = parse_double(key, value);
    else if (key == "ae.batch_size") cfg.ae.batch_size = parse_int(key, value);

    else if (key == "kbr.kind") cfg.kbr.kind = parse_kbr_kind(value);
    else if (key == "kbr.dim") cfg.kbr.dim = parse_int(key, value);
    else if (key == "kbr.epochs") cfg.kbr.epochs = parse_int(key, value);
    else if (key == "kbr.learning_rate") cfg.kbr.learning_rate = parse_double(key, value);
    else if (key == "kbr.batch_size") cfg.kbr.batch_size = parse_int(key, value);
    else if (key == "kbr.negatives") cfg.kbr.negatives_per_positive = parse_int(key, value);
    else if (key == "kbr.loss") {
        cfg.kbr.loss = parse_kbr_loss(value);
        cfg.kbr_loss_explicit = true;
    }
    else if (key == "kbr.margin") cfg.kbr.margin = parse_double(key, value);
    else if (key == "kbr.l2") cfg.kbr.l2 = parse_double(key, value);
    else if (key == "kbr.patience") cfg.kbr.patience = parse_int(key, value);

    else if (key == "discovery.n_h") cfg.discovery.n_h = parse_int(key, value);
    else if (key == "discovery.n_t") cfg.discovery.n_t = parse_int(key, value);
    else if (key == "discovery.n_f") cfg.discovery.n_f = parse_int(key, value);
    else if (key == "discovery.k_bar") cfg.discovery.k_bar = parse_int(key, value);
    else if (key == "discovery.lambda1") cfg.discovery.lambda1 = parse_double(key, value);
    else if (key == "discovery.lambda2") cfg.discovery.lambda2 = parse_double(key, value);
    else if (key == "discovery.lambda3") cfg.discovery.lambda3 = parse_double(key, value);
    else if (key == "discovery.exclude_known")
        cfg.discovery.exclude_known = parse_bool(key, value);
    else if (key == "discovery.cache_scope") {
        if (value == "per_relation")
            cfg.discovery.cache_scope = DiscoveryConfig::CacheScope::per_relation;
        else if (value == "per_head")
            cfg.discovery.cache_scope = DiscoveryConfig::CacheScope::per_head;
        else bad_value(key, value, "per_relation or per_head");
    }

    else if (key == "feedback.n_fb") cfg.feedback.n_fb = parse_int(key, value);
    else if (key == "feedback.rounds") cfg.feedback.rounds = parse_int(key, value);
    else if (key == "feedback.retrain") cfg.feedback.retrain = parse_retrain_target(value);

    else if (key == "mf.rank") cfg.mf.rank = parse_int(key, value);
    else if (key == "mf.min_count") cfg.mf.min_count = parse_int(key, value);
    else if (key == "mf.nmf_iters") cfg.mf.nmf_iters = parse_int(key, value);

    else if (key == "eval.micro") cfg.eval.micro = parse_bool(key, value);
    else if (key == "eval.bins") cfg.eval.bins = parse_double_list(key, value);

    else if (key == "sweep.ratios") cfg.sweep_ratios = parse_double_list(key, value);

    else throw ConfigError("unknown config key '" + key + "'");
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value, got '" + stripped + "'");
        try {
            apply_setting(cfg, stripped.substr(0, eq), stripped.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

RunConfig load_config_file(const std::string& path) {
    RunConfig cfg;
    apply_config_text(cfg, read_file(path));
    return cfg;
}

void apply_env_overrides(RunConfig& cfg) {
    if (const char* v = std::getenv("FFD_DATA_DIR")) cfg.paths.data_dir = v;
    if (const char* v = std::getenv("FFD_MODEL_DIR")) cfg.paths.model_dir = v;
    if (const char* v = std::getenv("FFD_OUT_DIR")) cfg.paths.out_dir = v;
}

void validate_config(const RunConfig& cfg) {
    if (cfg.threads < 0) throw ConfigError("threads must be >= 0");
    if (cfg.paths.data_dir.empty() || cfg.paths.model_dir.empty() || cfg.paths.out_dir.empty())
        throw ConfigError("paths.data_dir, paths.model_dir and paths.out_dir must be set");

    if (!(cfg.split.ratio > 0.0 && cfg.split.ratio <= 100.0))
        throw ConfigError("split.ratio must be in (0, 100]");
    if (cfg.split.num_heads < 1) throw ConfigError("split.num_heads must be >= 1");
    if (cfg.split.valid_fraction < 0.0)
        throw ConfigError("split.valid_fraction must be >= 0");

    if (cfg.ae.d1 < 1) throw ConfigError("ae.d1 must be >= 1");
    if (!(cfg.ae.corruption_rate >= 0.0 && cfg.ae.corruption_rate < 1.0))
        throw ConfigError("ae.corruption_rate must be in [0, 1)");
    if (cfg.ae.epochs < 1) throw ConfigError("ae.epochs must be >= 1");
    if (cfg.ae.learning_rate <= 0.0) throw ConfigError("ae.learning_rate must be > 0");
    if (cfg.ae.batch_size < 1) throw ConfigError("ae.batch_size must be >= 1");

    if (cfg.kbr.dim < 1) throw ConfigError("kbr.dim must be >= 1");
    if ((cfg.kbr.kind != KbrKind::distmult) && cfg.kbr.dim % 2)
        throw ConfigError("kbr.dim must be even for complex and analogy");
    if (cfg.kbr.epochs < 1) throw ConfigError("kbr.epochs must be >= 1");
    if (cfg.kbr.learning_rate <= 0.0) throw ConfigError("kbr.learning_rate must be > 0");
    if (cfg.kbr.batch_size < 1) throw ConfigError("kbr.batch_size must be >= 1");
    if (cfg.kbr.negatives_per_positive < 1) throw ConfigError("kbr.negatives must be >= 1");
    if (cfg.kbr.margin <= 0.0) throw ConfigError("kbr.margin must be > 0");
    if (cfg.kbr.l2 < 0.0) throw ConfigError("kbr.l2 must be >= 0");
    if (cfg.kbr.patience < 0) throw ConfigError("kbr.patience must be >= 0");

    if (cfg.discovery.n_h < 1 || cfg.discovery.n_t < 1 || cfg.discovery.n_f < 1)
        throw ConfigError("discovery.n_h, n_t and n_f must be >= 1");
    if (cfg.discovery.n_f > cfg.discovery.n_t)
        throw ConfigError("discovery.n_f must not exceed discovery.n_t");
    if (cfg.discovery.k_bar < 1) throw ConfigError("discovery.k_bar must be >= 1");
    if (!(std::isfinite(cfg.discovery.lambda1) && std::isfinite(cfg.discovery.lambda2) &&
          std::isfinite(cfg.discovery.lambda3)))
        throw ConfigError("discovery lambdas must be finite");

    if (cfg.feedback.n_fb < 1) throw ConfigError("feedback.n_fb must be >= 1");
    if (cfg.feedback.rounds < 1) throw ConfigError("feedback.rounds must be >= 1");

    if (cfg.mf.rank < 1) throw ConfigError("mf.rank must be >= 1");
    if (cfg.mf.min_count < 0) throw ConfigError("mf.min_count must be >= 0");
    if (cfg.mf.nmf_iters < 1) throw ConfigError("mf.nmf_iters must be >= 1");

    if (cfg.eval.bins.empty()) throw ConfigError("eval.bins must not be empty");
    for (std::size_t i = 1; i < cfg.eval.bins.size(); ++i)
        if (!(cfg.eval.bins[i] > cfg.eval.bins[i - 1]))
            throw ConfigError("eval.bins must be strictly increasing");

    if (cfg.sweep_ratios.empty()) throw ConfigError("sweep.ratios must not be empty");
    for (double r : cfg.sweep_ratios)
        if (!(r > 0.0 && r <= 100.0))
            throw ConfigError("sweep.ratios entries must be in (0, 100]");
}

KbrTrainConfig kbr_config_for(const RunConfig& cfg, KbrKind kind) {
    KbrTrainConfig out = cfg.kbr;
    out.kind = kind;
    if (!cfg.kbr_loss_explicit) out.loss = default_kbr_loss(kind);
    return out;
}

std::string config_text(const RunConfig& cfg) {
    std::ostringstream os;
    os << "seed = " << cfg.seed << "\n";
    os << "threads = " << cfg.threads << "\n";
    os << "paths.data_dir = " << cfg.paths.data_dir << "\n";
    os << "paths.model_dir = " << cfg.paths.model_dir << "\n";
    os << "paths.out_dir = " << cfg.paths.out_dir << "\n";
    os << "paths.all_facts = " << cfg.paths.all_facts << "\n";
    os << "split.ratio = " << format_g12(cfg.split.ratio) << "\n";
    os << "split.num_heads = " << cfg.split.num_heads << "\n";
    os << "split.valid_fraction = " << format_g12(cfg.split.valid_fraction) << "\n";
    os << "ae.d1 = " << cfg.ae.d1 << "\n";
    os << "ae.corruption_rate = " << format_g12(cfg.ae.corruption_rate) << "\n";
    os << "ae.epochs = " << cfg.ae.epochs << "\n";
    os << "ae.learning_rate = " << format_g12(cfg.ae.learning_rate) << "\n";
    os << "ae.batch_size = " << cfg.ae.batch_size << "\n";
    os << "kbr.kind = " << kbr_kind_name(cfg.kbr.kind) << "\n";
    os << "kbr.dim = " << cfg.kbr.dim << "\n";
    os << "kbr.epochs = " << cfg.kbr.epochs << "\n";
    os << "kbr.learning_rate = " << format_g12(cfg.kbr.learning_rate) << "\n";
    os << "kbr.batch_size = " << cfg.kbr.batch_size << "\n";
    os << "kbr.negatives = " << cfg.kbr.negatives_per_positive << "\n";
    if (cfg.kbr_loss_explicit) os << "kbr.loss = " << kbr_loss_name(cfg.kbr.loss) << "\n";
    os << "kbr.margin = " << format_g12(cfg.kbr.margin) << "\n";
    os << "kbr.l2 = " << format_g12(cfg.kbr.l2) << "\n";
    os << "kbr.patience = " << cfg.kbr.patience << "\n";
    os << "discovery.n_h = " << cfg.discovery.n_h << "\n";
    os << "discovery.n_t = " << cfg.discovery.n_t << "\n";
    os << "discovery.n_f = " << cfg.discovery.n_f << "\n";
    os << "discovery.k_bar = " << cfg.discovery.k_bar << "\n";
    os << "discovery.lambda1 = " << format_g12(cfg.discovery.lambda1) << "\n";
    os << "discovery.lambda2 = " << format_g12(cfg.discovery.lambda2) << "\n";
    os << "discovery.lambda3 = " << format_g12(cfg.discovery.lambda3) << "\n";
    os << "discovery.exclude_known = " << (cfg.discovery.exclude_known ? "true" : "false")
       << "\n";
    os << "discovery.cache_scope = "
       << (cfg.discovery.cache_scope == DiscoveryConfig::CacheScope::per_relation
               ? "per_relation"
               : "per_head")
       << "\n";
    os << "feedback.n_fb = " << cfg.feedback.n_fb << "\n";
    os << "feedback.rounds = " << cfg.feedback.rounds << "\n";
    os << "feedback.retrain = " << retrain_target_name(cfg.feedback.retrain) << "\n";
    os << "mf.rank = " << cfg.mf.rank << "\n";
    os << "mf.min_count = " << cfg.mf.min_count << "\n";
    os << "mf.nmf_iters = " << cfg.mf.nmf_iters << "\n";
    os << "eval.micro = " << (cfg.eval.micro ? "true" : "false") << "\n";
    os << "eval.bins = " << join_doubles(cfg.eval.bins) << "\n";
    os << "sweep.ratios = " << join_doubles(cfg.sweep_ratios) << "\n";
    return os.str();
}

}  // namespace ffd
