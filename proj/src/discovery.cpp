#include "ffd/discovery.hpp"

#include <algorithm>
#include <cmath>

namespace ffd {

namespace {

void validate_config(const DiscoveryConfig& cfg) {
    if (cfg.n_h < 1 || cfg.n_t < 1 || cfg.n_f < 1)
        throw ConfigError("discovery budgets must be >= 1");
    if (cfg.n_f > cfg.n_t) throw ConfigError("n_f must not exceed n_t");
    if (cfg.k_bar < 1) throw ConfigError("k_bar must be >= 1");
    if (!std::isfinite(cfg.lambda1) || !std::isfinite(cfg.lambda2) ||
        !std::isfinite(cfg.lambda3))
        throw ConfigError("facet weights must be finite");
}

void check_components(const AutoencoderParams& head_ae, const TailFacetTable& tail_facet,
                      const KbrModel& model, const TripleStore& train) {
    if (!head_ae.trained() || !tail_facet.ready() || !model.trained())
        throw StateError("discovery requires trained components");
    const int E = train.vocab().num_entities();
    const int R = train.vocab().num_relations();
    if (head_ae.num_relations != R || tail_facet.num_relations() != R ||
        model.num_relations != R || model.num_entities != E ||
        tail_facet.num_entities() != E)
        throw StateError("component shapes do not match the training vocabulary");
}

// rank-and-cut by (score desc, id asc)
std::vector<int> top_ids_by_score(const std::vector<double>& scores, int n) {
    std::vector<int> ids(scores.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    auto cmp = [&](int a, int b) {
        const double sa = scores[static_cast<std::size_t>(a)];
        const double sb = scores[static_cast<std::size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
    };
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(n), ids.size());
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                      cmp);
    ids.resize(k);
    return ids;
}

void sort_facts(std::vector<ScoredFact>& facts) {
    std::sort(facts.begin(), facts.end(), [](const ScoredFact& a, const ScoredFact& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.triple.r != b.triple.r) return a.triple.r < b.triple.r;
        return a.triple.t < b.triple.t;
    });
}

}  // namespace

double confidence(double f_h_r, double f_t_r, double f_hr_t, const DiscoveryConfig& cfg) {
    return cfg.lambda1 * f_h_r + cfg.lambda2 * f_t_r + cfg.lambda3 * f_hr_t;
}

TailFacetTable::TailFacetTable(const AutoencoderParams& tail_ae, const TripleStore& train) {
    if (!tail_ae.trained()) throw StateError("tail autoencoder is untrained");
    const int E = train.vocab().num_entities();
    const int R = train.vocab().num_relations();
    if (tail_ae.num_relations != R)
        throw StateError("tail autoencoder relation count does not match vocabulary");
    scores_ = Mat(E, R);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int e = 0; e < E; ++e) {
        const RelationProfile p = relation_profile(train, e, Role::tail);
        const std::vector<double> s = predict_relation_scores(tail_ae, p);
        double* row = scores_.row(e);
        for (int r = 0; r < R; ++r) row[r] = s[static_cast<std::size_t>(r)];
    }
}

std::vector<std::vector<int>> TailFacetTable::top_tails(int n_t) const {
    if (!ready()) throw StateError("tail facet table is empty");
    const int E = scores_.rows();
    const int R = scores_.cols();
    std::vector<std::vector<int>> top(static_cast<std::size_t>(R));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int r = 0; r < R; ++r) {
        std::vector<double> col(static_cast<std::size_t>(E));
        for (int e = 0; e < E; ++e) col[static_cast<std::size_t>(e)] = scores_(e, r);
        top[static_cast<std::size_t>(r)] = top_ids_by_score(col, n_t);
    }
    return top;
}

std::vector<ScoredFact> discover_candidates(int h, const AutoencoderParams& head_ae,
                                            const TailFacetTable& tail_facet,
                                            const std::vector<std::vector<int>>& top_tails,
                                            const KbrModel& model, const TripleStore& train,
                                            const DiscoveryConfig& cfg) {
    validate_config(cfg);
    check_components(head_ae, tail_facet, model, train);
    if (h < 0 || h >= train.vocab().num_entities())
        throw LookupError("head id out of range: " + std::to_string(h));
    if (static_cast<int>(top_tails.size()) != train.vocab().num_relations())
        throw ContractError("top_tails size does not match relation count");

    const std::vector<double> f_h =
        predict_relation_scores(head_ae, relation_profile(train, h, Role::head));
    const std::vector<int> kept_rels = top_ids_by_score(f_h, cfg.n_h);

    struct Cand {
        int r;
        int t;
        double f3;
    };
    std::vector<Cand> pool;
    pool.reserve(static_cast<std::size_t>(kept_rels.size()) *
                 static_cast<std::size_t>(cfg.n_f));

    std::vector<double> tls;
    for (int r : kept_rels) {
        tls = tail_log_softmax(model, h, r);
        const std::vector<int>& tails = top_tails[static_cast<std::size_t>(r)];
        std::vector<Cand> per_rel;
        per_rel.reserve(tails.size());
        for (int t : tails) per_rel.push_back({r, t, tls[static_cast<std::size_t>(t)]});
        std::sort(per_rel.begin(), per_rel.end(), [](const Cand& a, const Cand& b) {
            if (a.f3 != b.f3) return a.f3 > b.f3;
            return a.t < b.t;
        });
        const std::size_t keep =
            cfg.cache_scope == DiscoveryConfig::CacheScope::per_relation
                ? std::min<std::size_t>(static_cast<std::size_t>(cfg.n_f), per_rel.size())
                : per_rel.size();
        pool.insert(pool.end(), per_rel.begin(),
                    per_rel.begin() + static_cast<std::ptrdiff_t>(keep));
    }

    if (cfg.cache_scope == DiscoveryConfig::CacheScope::per_head) {
        std::sort(pool.begin(), pool.end(), [](const Cand& a, const Cand& b) {
            if (a.f3 != b.f3) return a.f3 > b.f3;
            if (a.r != b.r) return a.r < b.r;
            return a.t < b.t;
        });
        if (pool.size() > static_cast<std::size_t>(cfg.n_f))
            pool.resize(static_cast<std::size_t>(cfg.n_f));
    }

    std::vector<ScoredFact> out;
    out.reserve(pool.size());
    for (const Cand& c : pool) {
        if (cfg.exclude_known && train.contains(h, c.r, c.t)) continue;
        ScoredFact f;
        f.triple = Triple{h, c.r, c.t};
        f.f_h_r = f_h[static_cast<std::size_t>(c.r)];
        f.f_t_r = tail_facet.at(c.t, c.r);
        f.f_hr_t = c.f3;
        f.confidence = confidence(f.f_h_r, f.f_t_r, f.f_hr_t, cfg);
        out.push_back(f);
    }
    return out;
}

std::vector<ScoredFact> discover_for_head(int h, const AutoencoderParams& head_ae,
                                          const TailFacetTable& tail_facet,
                                          const std::vector<std::vector<int>>& top_tails,
                                          const KbrModel& model, const TripleStore& train,
                                          const DiscoveryConfig& cfg) {
    std::vector<ScoredFact> facts =
        discover_candidates(h, head_ae, tail_facet, top_tails, model, train, cfg);
    sort_facts(facts);
    if (facts.size() > static_cast<std::size_t>(cfg.k_bar))
        facts.resize(static_cast<std::size_t>(cfg.k_bar));
    return facts;
}

std::vector<ScoredFact> discover_for_head(int h, const AutoencoderParams& head_ae,
                                          const AutoencoderParams& tail_ae,
                                          const KbrModel& model, const TripleStore& train,
                                          const DiscoveryConfig& cfg) {
    const TailFacetTable table(tail_ae, train);
    return discover_for_head(h, head_ae, table, table.top_tails(cfg.n_t), model, train, cfg);
}

std::vector<ScoredFact> discover_all(const std::vector<int>& heads,
                                     const AutoencoderParams& head_ae,
                                     const TailFacetTable& tail_facet, const KbrModel& model,
                                     const TripleStore& train, const DiscoveryConfig& cfg) {
    validate_config(cfg);
    check_components(head_ae, tail_facet, model, train);
    std::vector<int> sorted_heads = heads;
    std::sort(sorted_heads.begin(), sorted_heads.end());
    sorted_heads.erase(std::unique(sorted_heads.begin(), sorted_heads.end()),
                       sorted_heads.end());

    const std::vector<std::vector<int>> top = tail_facet.top_tails(cfg.n_t);
    std::vector<std::vector<ScoredFact>> per_head(sorted_heads.size());
    std::string first_error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long i = 0; i < static_cast<long>(sorted_heads.size()); ++i) {
        const int head = sorted_heads[static_cast<std::size_t>(i)];
        try {
            per_head[static_cast<std::size_t>(i)] =
                discover_for_head(head, head_ae, tail_facet, top, model, train, cfg);
        } catch (const std::exception& e) {
            const std::string msg =
                "discovery failed for head " + std::to_string(head) + ": " + e.what();
#ifdef _OPENMP
#pragma omp critical
#endif
            if (first_error.empty()) first_error = msg;
        }
    }
    if (!first_error.empty()) throw StateError(first_error);

    std::vector<ScoredFact> out;
    std::size_t total = 0;
    for (const auto& v : per_head) total += v.size();
    out.reserve(total);
    for (const auto& v : per_head) out.insert(out.end(), v.begin(), v.end());
    return out;
}

std::vector<ScoredFact> discover_all(const std::vector<int>& heads,
                                     const AutoencoderParams& head_ae,
                                     const AutoencoderParams& tail_ae, const KbrModel& model,
                                     const TripleStore& train, const DiscoveryConfig& cfg) {
    const TailFacetTable table(tail_ae, train);
    return discover_all(heads, head_ae, table, model, train, cfg);
}

std::vector<ScoredFact> exhaustive_kbr_rank(const KbrModel& model, int h, int k_bar,
                                            const TripleStore& train, bool exclude_known) {
    if (!model.trained()) throw StateError("kbr model is untrained");
    if (h < 0 || h >= model.num_entities)
        throw LookupError("head id out of range: " + std::to_string(h));
    if (k_bar < 1) throw ConfigError("k_bar must be >= 1");
    const int E = model.num_entities;
    const int R = model.num_relations;

    struct Cand {
        double s;
        int r;
        int t;
    };
    auto cmp = [](const Cand& a, const Cand& b) {
        if (a.s != b.s) return a.s > b.s;
        if (a.r != b.r) return a.r < b.r;
        return a.t < b.t;
    };

    std::vector<double> row(static_cast<std::size_t>(E));
    std::vector<double> rel_lse(static_cast<std::size_t>(R));
    std::vector<Cand> pool;
    pool.reserve(static_cast<std::size_t>(R) * static_cast<std::size_t>(std::min(k_bar, E)));
    std::vector<Cand> per_rel;
    for (int r = 0; r < R; ++r) {
        score_all_tails(model, h, r, row);
        rel_lse[static_cast<std::size_t>(r)] = logsumexp(row);
        per_rel.clear();
        per_rel.reserve(static_cast<std::size_t>(E));
        for (int t = 0; t < E; ++t) {
            if (exclude_known && train.contains(h, r, t)) continue;
            per_rel.push_back({row[static_cast<std::size_t>(t)], r, t});
        }
        if (per_rel.size() > static_cast<std::size_t>(k_bar)) {
            std::nth_element(per_rel.begin(),
                             per_rel.begin() + static_cast<std::ptrdiff_t>(k_bar - 1),
                             per_rel.end(), cmp);
            per_rel.resize(static_cast<std::size_t>(k_bar));
        }
        pool.insert(pool.end(), per_rel.begin(), per_rel.end());
    }
    const double lse = logsumexp(rel_lse);

    std::sort(pool.begin(), pool.end(), cmp);
    if (pool.size() > static_cast<std::size_t>(k_bar))
        pool.resize(static_cast<std::size_t>(k_bar));

    std::vector<ScoredFact> out;
    out.reserve(pool.size());
    for (const Cand& c : pool) {
        ScoredFact f;
        f.triple = Triple{h, c.r, c.t};
        f.f_hr_t = c.s - lse;
        f.confidence = f.f_hr_t;
        out.push_back(f);
    }
    return out;
}

void save_scored_facts(const std::vector<ScoredFact>& facts, const Vocab& vocab,
                       const std::string& path) {
    std::string out;
    out.reserve(facts.size() * 64);
    for (const ScoredFact& f : facts) {
        out += vocab.entity_label(f.triple.h);
        out += '\t';
        out += vocab.relation_label(f.triple.r);
        out += '\t';
        out += vocab.entity_label(f.triple.t);
        out += '\t';
        out += format_g12(f.confidence);
        out += '\t';
        out += format_g12(f.f_h_r);
        out += '\t';
        out += format_g12(f.f_t_r);
        out += '\t';
        out += format_g12(f.f_hr_t);
        out += '\n';
    }
    write_file_atomic(path, out);
}

std::vector<ScoredFact> load_scored_facts(const std::string& path, const Vocab& vocab) {
    const std::string text = read_file(path);
    std::vector<ScoredFact> facts;
    std::size_t pos = 0;
    int lineno = 0;
    while (pos < text.size()) {
        ++lineno;
        std::size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos);
        pos = (eol == std::string::npos) ? text.size() : eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : tab - start));
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 7)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected 7 tab-separated fields");
        ScoredFact f;
        f.triple.h = vocab.entity_id(fields[0]);
        f.triple.r = vocab.relation_id(fields[1]);
        f.triple.t = vocab.entity_id(fields[2]);
        try {
            f.confidence = std::stod(std::string(fields[3]));
            f.f_h_r = std::stod(std::string(fields[4]));
            f.f_t_r = std::stod(std::string(fields[5]));
            f.f_hr_t = std::stod(std::string(fields[6]));
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad numeric field");
        }
        facts.push_back(f);
    }
    return facts;
}

}  // namespace ffd
