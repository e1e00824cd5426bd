#include "ffd/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <vector>

#include "ffd/baselines.hpp"
#include "ffd/discovery.hpp"
#include "ffd/util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;

namespace ffd {

namespace {

void apply_threads(const RunConfig& cfg) {
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(effective_threads(cfg.threads));
#else
    (void)cfg;
#endif
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::string loss_csv(const std::vector<double>& losses) {
    std::ostringstream os;
    os << "epoch,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i)
        os << (i + 1) << ',' << format_g12(losses[i]) << '\n';
    return os.str();
}

std::string sanitize_label(const std::string& label) {
    std::string out;
    out.reserve(label.size());
    for (char c : label)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    if (out.empty()) out = "head";
    return out;
}

FfdComponents load_components(const RunConfig& cfg, KbrKind kind) {
    FfdComponents comps;
    comps.head_ae = load_autoencoder(ae_model_path(cfg, Role::head));
    comps.tail_ae = load_autoencoder(ae_model_path(cfg, Role::tail));
    comps.kbr = load_kbr(kbr_model_path(cfg, kind));
    return comps;
}

void check_components_against(const FfdComponents& comps, const TripleStore& train) {
    const int R = train.vocab().num_relations();
    if (comps.head_ae.num_relations != R || comps.tail_ae.num_relations != R)
        throw StateError("auto-encoder relation count does not match the split");
    if (comps.kbr.num_entities != train.vocab().num_entities() ||
        comps.kbr.num_relations != R)
        throw StateError("kbr model shape does not match the split");
}

// Discovery for every split head with the exhaustive grid ranker.
std::vector<ScoredFact> exhaustive_all(const KbrModel& model, const std::vector<int>& heads,
                                       int k_bar, const TripleStore& train,
                                       bool exclude_known) {
    std::vector<std::vector<ScoredFact>> per_head(heads.size());
    std::string first_error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::size_t i = 0; i < heads.size(); ++i) {
        try {
            per_head[i] = exhaustive_kbr_rank(model, heads[i], k_bar, train, exclude_known);
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) throw StateError(first_error);
    std::vector<ScoredFact> out;
    for (auto& v : per_head) out.insert(out.end(), v.begin(), v.end());
    return out;
}

std::vector<ScoredFact> mf_all(const MfFactors& f, const PairVocab& pv,
                               const std::vector<int>& heads, int k_bar,
                               const TripleStore& train, bool exclude_known) {
    std::vector<std::vector<ScoredFact>> per_head(heads.size());
    std::string first_error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::size_t i = 0; i < heads.size(); ++i) {
        try {
            per_head[i] = mf_predict(f, pv, heads[i], k_bar, train, exclude_known);
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!first_error.empty()) throw StateError(first_error);
    std::vector<ScoredFact> out;
    for (auto& v : per_head) out.insert(out.end(), v.begin(), v.end());
    return out;
}

}  // namespace

SplitArtifacts split_paths(const RunConfig& cfg) {
    return SplitArtifacts{join(cfg.paths.data_dir, "train.tsv"),
                          join(cfg.paths.data_dir, "valid.tsv"),
                          join(cfg.paths.data_dir, "test.tsv"),
                          join(cfg.paths.data_dir, "heads.txt")};
}

std::string ae_model_path(const RunConfig& cfg, Role role) {
    return join(cfg.paths.model_dir, role == Role::head ? "ae_head.bin" : "ae_tail.bin");
}

std::string kbr_model_path(const RunConfig& cfg, KbrKind kind) {
    return join(cfg.paths.model_dir, "kbr_" + kbr_kind_name(kind) + ".bin");
}

std::string loss_trace_path(const std::string& model_path) {
    std::string base = model_path;
    if (base.size() > 4 && base.compare(base.size() - 4, 4, ".bin") == 0)
        base.erase(base.size() - 4);
    return base + "_loss.csv";
}

std::string method_file_tag(const std::string& method) {
    std::string tag;
    for (char c : method) {
        if (c == ':') tag.push_back('_');
        else if (c == '+') tag += "plus";
        else tag.push_back(c);
    }
    return tag;
}

std::string discovered_path(const RunConfig& cfg, const std::string& method) {
    return join(cfg.paths.out_dir, "discovered_" + method_file_tag(method) + ".tsv");
}

SplitArtifacts cmd_split(const RunConfig& cfg) {
    validate_config(cfg);
    apply_threads(cfg);
    if (cfg.paths.all_facts.empty())
        throw ConfigError("paths.all_facts must point at the input triple file");
    const TripleStore all = load_triples(cfg.paths.all_facts);
    const KbSplit split = split_fdkb(all, cfg.split.ratio, cfg.split.num_heads,
                                     cfg.split.valid_fraction, cfg.seed);
    ensure_dir(cfg.paths.data_dir);
    const SplitArtifacts paths = split_paths(cfg);
    save_split(split, paths.train, paths.valid, paths.test, paths.heads);
    return paths;
}

KbSplit load_split_artifacts(const RunConfig& cfg) {
    const SplitArtifacts paths = split_paths(cfg);
    return load_split(paths.train, paths.valid, paths.test, paths.heads);
}

std::string cmd_train(const RunConfig& cfg, const std::string& component, bool resume) {
    validate_config(cfg);
    apply_threads(cfg);
    const KbSplit split = load_split_artifacts(cfg);
    ensure_dir(cfg.paths.model_dir);

    if (component == "ae-head" || component == "ae-tail") {
        const Role role = component == "ae-head" ? Role::head : Role::tail;
        const std::string path = ae_model_path(cfg, role);
        AeTrainConfig acfg = cfg.ae;
        acfg.seed = derive_seed(cfg.seed, role == Role::head ? "ae:head" : "ae:tail");
        AutoencoderParams prev;
        if (resume) prev = load_autoencoder(path);
        const AeTrainResult trained = train_autoencoder(
            collect_profiles(split.train, role), acfg, resume ? &prev : nullptr);
        save_autoencoder(trained.params, path);
        write_file_atomic(loss_trace_path(path), loss_csv(trained.epoch_loss));
        return path;
    }

    if (component.rfind("kbr:", 0) == 0) {
        const KbrKind kind = parse_kbr_kind(component.substr(4));
        const std::string path = kbr_model_path(cfg, kind);
        KbrTrainConfig kcfg = kbr_config_for(cfg, kind);
        kcfg.seed = derive_seed(cfg.seed, "kbr:" + kbr_kind_name(kind));
        KbrModel prev;
        if (resume) prev = load_kbr(path);
        const TripleStore* valid =
            kcfg.patience > 0 && !split.valid.facts().empty() ? &split.valid : nullptr;
        const KbrTrainResult trained =
            train_kbr(split.train, kcfg, valid, resume ? &prev : nullptr);
        save_kbr(trained.model, path);
        write_file_atomic(loss_trace_path(path), loss_csv(trained.epoch_loss));
        return path;
    }

    throw ConfigError("unknown train component '" + component +
                      "' (expected ae-head, ae-tail or kbr:<kind>)");
}

std::string cmd_discover(const RunConfig& cfg, const std::string& method) {
    validate_config(cfg);
    apply_threads(cfg);
    const KbSplit split = load_split_artifacts(cfg);
    const std::string out_path = discovered_path(cfg, method);
    ensure_dir(cfg.paths.out_dir);

    std::vector<ScoredFact> facts;
    if (method.rfind("ffd:", 0) == 0) {
        const KbrKind kind = parse_kbr_kind(method.substr(4));
        const FfdComponents comps = load_components(cfg, kind);
        check_components_against(comps, split.train);
        facts = discover_all(split.heads, comps.head_ae, comps.tail_ae, comps.kbr,
                             split.train, cfg.discovery);
    } else if (method.rfind("kbr+:", 0) == 0) {
        const KbrKind kind = parse_kbr_kind(method.substr(5));
        const KbrModel model = load_kbr(kbr_model_path(cfg, kind));
        if (model.num_entities != split.train.vocab().num_entities() ||
            model.num_relations != split.train.vocab().num_relations())
            throw StateError("kbr model shape does not match the split");
        facts = exhaustive_all(model, split.heads, cfg.discovery.k_bar, split.train,
                               cfg.discovery.exclude_known);
    } else if (method == "svd" || method == "nmf") {
        const auto [pv, M] = build_pair_matrix(split.train, cfg.mf.min_count);
        MfFactors f;
        if (method == "svd")
            f = svd_factorize(M, cfg.mf.rank, derive_seed(cfg.seed, "mf:svd"));
        else
            f = nmf_factorize(M, cfg.mf.rank, cfg.mf.nmf_iters,
                              derive_seed(cfg.seed, "mf:nmf"));
        facts = mf_all(f, pv, split.heads, cfg.discovery.k_bar, split.train,
                       cfg.discovery.exclude_known);
    } else {
        throw ConfigError("unknown discover method '" + method +
                          "' (expected ffd:<kind>, kbr+:<kind>, svd or nmf)");
    }

    save_scored_facts(facts, split.train.vocab(), out_path);
    return out_path;
}

EvalArtifacts cmd_eval(const RunConfig& cfg, const std::string& facts_file) {
    validate_config(cfg);
    apply_threads(cfg);
    const KbSplit split = load_split_artifacts(cfg);
    const std::vector<ScoredFact> facts =
        load_scored_facts(facts_file, split.train.vocab());

    EvalArtifacts out;
    out.report = evaluate(facts, split.test, split.train, cfg.eval.bins, cfg.eval.micro);

    const std::string stem = fs::path(facts_file).stem().string();
    ensure_dir(cfg.paths.out_dir);
    out.report_path = join(cfg.paths.out_dir, "report_" + stem + ".txt");
    out.per_head_path = join(cfg.paths.out_dir, "per_head_" + stem + ".csv");
    out.buckets_path = join(cfg.paths.out_dir, "buckets_" + stem + ".csv");
    write_file_atomic(out.report_path, report_text(out.report));
    write_file_atomic(out.per_head_path, per_head_csv(out.report, split.train.vocab()));
    write_file_atomic(out.buckets_path, buckets_csv(out.report, cfg.eval.bins));
    return out;
}

FeedbackArtifacts cmd_feedback(const RunConfig& cfg) {
    validate_config(cfg);
    apply_threads(cfg);
    const KbSplit split = load_split_artifacts(cfg);
    const FfdComponents initial = load_components(cfg, cfg.kbr.kind);
    check_components_against(initial, split.train);

    AeTrainConfig acfg = cfg.ae;
    acfg.seed = cfg.seed;  // feedback derives per-round labels from this
    KbrTrainConfig kcfg = kbr_config_for(cfg, cfg.kbr.kind);
    kcfg.seed = cfg.seed;

    FeedbackArtifacts out;
    out.result = feedback_loop(split, initial, cfg.discovery, cfg.feedback, acfg, kcfg);

    ensure_dir(cfg.paths.out_dir);
    ensure_dir(cfg.paths.model_dir);
    out.audit_path = join(cfg.paths.out_dir, "feedback_audit.tsv");
    write_file_atomic(out.audit_path,
                      audit_tsv(out.result.audit, split.train.vocab()));

    std::ostringstream trace;
    trace << "round,train_size,discovered,fed_back,added,map,precision,recall,f1\n";
    for (const FeedbackRoundTrace& row : out.result.trace) {
        trace << row.round << ',' << row.train_size << ',' << row.discovered << ','
              << row.fed_back << ',' << row.added << ',' << format_g12(row.map) << ','
              << format_g12(row.precision) << ',' << format_g12(row.recall) << ','
              << format_g12(row.f1) << '\n';
    }
    out.trace_path = join(cfg.paths.out_dir, "feedback_trace.csv");
    write_file_atomic(out.trace_path, trace.str());

    const std::string kind = kbr_kind_name(cfg.kbr.kind);
    out.facts_path = join(cfg.paths.out_dir, "discovered_feedback_" + kind + ".tsv");
    save_scored_facts(out.result.final_discovery, split.train.vocab(), out.facts_path);

    save_autoencoder(out.result.comps.head_ae,
                     join(cfg.paths.model_dir, "ae_head_feedback.bin"));
    save_autoencoder(out.result.comps.tail_ae,
                     join(cfg.paths.model_dir, "ae_tail_feedback.bin"));
    save_kbr(out.result.comps.kbr,
             join(cfg.paths.model_dir, "kbr_" + kind + "_feedback.bin"));
    return out;
}

std::string cmd_sweep(const RunConfig& cfg) {
    validate_config(cfg);
    apply_threads(cfg);
    if (cfg.paths.all_facts.empty())
        throw ConfigError("paths.all_facts must point at the input triple file");
    const TripleStore all = load_triples(cfg.paths.all_facts);

    std::vector<double> ratios = cfg.sweep_ratios;
    std::sort(ratios.begin(), ratios.end(), std::greater<>());
    ratios.erase(std::unique(ratios.begin(), ratios.end()), ratios.end());
    const double base_ratio = ratios.front();

    const KbSplit base = split_fdkb(all, base_ratio, cfg.split.num_heads,
                                    cfg.split.valid_fraction, cfg.seed);

    std::vector<SweepRow> rows;
    for (double ratio : ratios) {
        const KbSplit split = ratio == base_ratio
                                  ? base
                                  : shrink_split_train(base, all, base_ratio, ratio,
                                                       cfg.seed);
        const std::string tag = "sweep:" + format_g12(ratio);

        AeTrainConfig head_cfg = cfg.ae;
        head_cfg.seed = derive_seed(cfg.seed, tag + ":ae:head");
        const AutoencoderParams head_ae =
            train_autoencoder(collect_profiles(split.train, Role::head), head_cfg).params;

        AeTrainConfig tail_cfg = cfg.ae;
        tail_cfg.seed = derive_seed(cfg.seed, tag + ":ae:tail");
        const AutoencoderParams tail_ae =
            train_autoencoder(collect_profiles(split.train, Role::tail), tail_cfg).params;

        KbrTrainConfig kcfg = kbr_config_for(cfg, cfg.kbr.kind);
        kcfg.seed = derive_seed(cfg.seed, tag + ":kbr");
        const TripleStore* valid =
            kcfg.patience > 0 && !split.valid.facts().empty() ? &split.valid : nullptr;
        const KbrModel model = train_kbr(split.train, kcfg, valid).model;

        const std::vector<ScoredFact> facts = discover_all(
            split.heads, head_ae, tail_ae, model, split.train, cfg.discovery);
        const EvalReport report =
            evaluate(facts, split.test, split.train, cfg.eval.bins, cfg.eval.micro);

        SweepRow row;
        row.ratio = ratio;
        row.train_size = split.train.size();
        row.map = report.map;
        row.precision = report.precision;
        row.recall = report.recall;
        row.f1 = report.f1;
        rows.push_back(row);
    }

    ensure_dir(cfg.paths.out_dir);
    const std::string path = join(cfg.paths.out_dir, "sweep.csv");
    write_file_atomic(path, sweep_csv(rows));
    return path;
}

std::string cmd_case(const RunConfig& cfg, const std::string& head_label) {
    validate_config(cfg);
    apply_threads(cfg);
    const KbSplit split = load_split_artifacts(cfg);
    const int h = split.train.vocab().entity_id(head_label);

    const FfdComponents comps = load_components(cfg, cfg.kbr.kind);
    check_components_against(comps, split.train);
    const std::vector<ScoredFact> facts =
        discover_for_head(h, comps.head_ae, comps.tail_ae, comps.kbr, split.train,
                          cfg.discovery);

    const Vocab& vocab = split.train.vocab();
    std::size_t rel_w = 8, tail_w = 4;
    for (const ScoredFact& sf : facts) {
        rel_w = std::max(rel_w, vocab.relation_label(sf.triple.r).size());
        tail_w = std::max(tail_w, vocab.entity_label(sf.triple.t).size());
    }

    std::ostringstream os;
    os << "discovered facts for head: " << head_label << "\n";
    os << std::left << std::setw(5) << "rank" << "  " << std::setw(static_cast<int>(rel_w))
       << "relation" << "  " << std::setw(static_cast<int>(tail_w)) << "tail" << "  "
       << std::setw(17) << "confidence" << "  " << std::setw(17) << "f_h" << "  "
       << std::setw(17) << "f_t" << "  " << "f_hrt" << "\n";
    int rank = 1;
    for (const ScoredFact& sf : facts) {
        os << std::left << std::setw(5) << rank++ << "  "
           << std::setw(static_cast<int>(rel_w)) << vocab.relation_label(sf.triple.r)
           << "  " << std::setw(static_cast<int>(tail_w))
           << vocab.entity_label(sf.triple.t) << "  " << std::setw(17)
           << format_g12(sf.confidence) << "  " << std::setw(17) << format_g12(sf.f_h_r)
           << "  " << std::setw(17) << format_g12(sf.f_t_r) << "  "
           << format_g12(sf.f_hr_t) << "\n";
    }
    if (facts.empty()) os << "(no facts survived the facet pruning)\n";

    ensure_dir(cfg.paths.out_dir);
    const std::string path =
        join(cfg.paths.out_dir, "case_" + sanitize_label(head_label) + ".txt");
    write_file_atomic(path, os.str());
    return os.str();
}

}  // namespace ffd
