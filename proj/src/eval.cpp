#include "ffd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace ffd {

const std::vector<double> kDefaultDifficultyBins = {1.0, 1.5, 3.0, 10.0};

namespace {

PrecisionRecall pr_from_counts(std::size_t hits, std::size_t discovered,
                               std::size_t test) {
    PrecisionRecall pr;
    pr.precision = discovered ? static_cast<double>(hits) / static_cast<double>(discovered)
                              : 0.0;
    pr.recall = test ? static_cast<double>(hits) / static_cast<double>(test) : 0.0;
    pr.f1 = (pr.precision + pr.recall > 0.0)
                ? 2.0 * pr.precision * pr.recall / (pr.precision + pr.recall)
                : 0.0;
    return pr;
}

}  // namespace

PrecisionRecall precision_recall_f1(const std::vector<Triple>& discovered,
                                    const TripleStore& test) {
    std::unordered_set<Triple, TripleHash> seen;
    seen.reserve(discovered.size() * 2);
    std::size_t hits = 0;
    for (const Triple& f : discovered) {
        if (!seen.insert(f).second) continue;
        if (test.contains(f.h, f.r, f.t)) ++hits;
    }
    return pr_from_counts(hits, seen.size(), test.size());
}

PrecisionRecall precision_recall_f1(const std::vector<ScoredFact>& discovered,
                                    const TripleStore& test) {
    std::vector<Triple> triples;
    triples.reserve(discovered.size());
    for (const ScoredFact& f : discovered) triples.push_back(f.triple);
    return precision_recall_f1(triples, test);
}

std::map<int, std::vector<ScoredFact>> group_by_head(const std::vector<ScoredFact>& facts) {
    std::map<int, std::vector<ScoredFact>> out;
    for (const ScoredFact& f : facts) out[f.triple.h].push_back(f);
    return out;
}

double map_score(const std::map<int, std::vector<ScoredFact>>& per_head_rankings,
                 const TripleStore& test, bool micro) {
    // relevant counts per head
    std::map<int, std::size_t> relevant;
    for (const Triple& f : test.facts()) ++relevant[f.h];

    for (const auto& [h, ranking] : per_head_rankings)
        for (std::size_t i = 1; i < ranking.size(); ++i)
            if (ranking[i].confidence > ranking[i - 1].confidence)
                throw ContractError("ranking for head " + std::to_string(h) +
                                    " is not sorted by confidence");

    double ap_sum = 0.0;
    double micro_num = 0.0;
    std::size_t heads = 0;
    std::size_t micro_den = 0;
    for (const auto& [h, rel_count] : relevant) {
        if (rel_count == 0) continue;
        ++heads;
        micro_den += rel_count;
        auto it = per_head_rankings.find(h);
        if (it == per_head_rankings.end()) continue;
        std::size_t hits = 0;
        double prec_sum = 0.0;
        const auto& ranking = it->second;
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            const Triple& f = ranking[i].triple;
            if (test.contains(f.h, f.r, f.t)) {
                ++hits;
                prec_sum += static_cast<double>(hits) / static_cast<double>(i + 1);
            }
        }
        ap_sum += prec_sum / static_cast<double>(rel_count);
        micro_num += prec_sum;
    }
    if (micro) return micro_den ? micro_num / static_cast<double>(micro_den) : 0.0;
    return heads ? ap_sum / static_cast<double>(heads) : 0.0;
}

std::vector<RelationDifficulty> relation_difficulty(const TripleStore& store) {
    const int R = store.vocab().num_relations();
    std::vector<long> facts(static_cast<std::size_t>(R), 0);
    std::vector<std::unordered_set<int>> heads(static_cast<std::size_t>(R));
    std::vector<std::unordered_set<int>> tails(static_cast<std::size_t>(R));
    for (const Triple& f : store.facts()) {
        const auto r = static_cast<std::size_t>(f.r);
        ++facts[r];
        heads[r].insert(f.h);
        tails[r].insert(f.t);
    }
    std::vector<RelationDifficulty> out;
    for (int r = 0; r < R; ++r) {
        const auto ru = static_cast<std::size_t>(r);
        if (!facts[ru]) continue;
        RelationDifficulty d;
        d.relation = r;
        d.hpt = static_cast<double>(facts[ru]) / static_cast<double>(tails[ru].size());
        d.tph = static_cast<double>(facts[ru]) / static_cast<double>(heads[ru].size());
        out.push_back(d);
    }
    return out;
}

namespace {

int bin_of(double v, const std::vector<double>& edges) {
    int b = -1;
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (v >= edges[i]) b = static_cast<int>(i);
    return b;
}

}  // namespace

std::vector<DifficultyBucket> precision_by_difficulty(
    const std::vector<ScoredFact>& discovered, const TripleStore& test,
    const std::vector<RelationDifficulty>& difficulties,
    const std::vector<double>& bin_edges) {
    if (bin_edges.empty()) throw ContractError("bin edges must be nonempty");
    for (std::size_t i = 1; i < bin_edges.size(); ++i)
        if (bin_edges[i] <= bin_edges[i - 1])
            throw ContractError("bin edges must be strictly increasing");

    std::unordered_map<int, std::pair<double, double>> table;  // r -> (hpt, tph)
    for (const RelationDifficulty& d : difficulties)
        table[d.relation] = {d.hpt, d.tph};

    const int nb = static_cast<int>(bin_edges.size());
    // bucket grid plus one unknown-relation bucket at the end
    std::vector<DifficultyBucket> buckets(static_cast<std::size_t>(nb * nb) + 1);
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) {
            auto& b = buckets[static_cast<std::size_t>(i * nb + j)];
            b.hpt_bin = i;
            b.tph_bin = j;
        }

    for (const ScoredFact& f : discovered) {
        auto it = table.find(f.triple.r);
        std::size_t slot;
        if (it == table.end()) {
            slot = buckets.size() - 1;
        } else {
            const int bi = bin_of(it->second.first, bin_edges);
            const int bj = bin_of(it->second.second, bin_edges);
            if (bi < 0 || bj < 0)
                slot = buckets.size() - 1;
            else
                slot = static_cast<std::size_t>(bi * nb + bj);
        }
        auto& b = buckets[slot];
        ++b.count;
        if (test.contains(f.triple.h, f.triple.r, f.triple.t)) ++b.hits;
    }

    for (auto& b : buckets) {
        b.empty = b.count == 0;
        b.precision = b.empty ? 0.0
                              : static_cast<double>(b.hits) / static_cast<double>(b.count);
    }
    return buckets;
}

EvalReport evaluate(const std::vector<ScoredFact>& discovered, const TripleStore& test,
                    const TripleStore& difficulty_source,
                    const std::vector<double>& bin_edges, bool micro) {
    EvalReport rep;
    const PrecisionRecall pr = precision_recall_f1(discovered, test);
    rep.precision = pr.precision;
    rep.recall = pr.recall;
    rep.f1 = pr.f1;

    const auto rankings = group_by_head(discovered);
    rep.map = map_score(rankings, test, micro);

    std::map<int, std::size_t> relevant;
    for (const Triple& f : test.facts()) ++relevant[f.h];
    for (const auto& [h, rel_count] : relevant) {
        EvalReport::PerHead ph;
        ph.head = h;
        auto it = rankings.find(h);
        if (it != rankings.end()) {
            std::size_t hits = 0;
            double prec_sum = 0.0;
            for (std::size_t i = 0; i < it->second.size(); ++i) {
                const Triple& f = it->second[i].triple;
                if (test.contains(f.h, f.r, f.t)) {
                    ++hits;
                    prec_sum += static_cast<double>(hits) / static_cast<double>(i + 1);
                }
            }
            ph.ap = prec_sum / static_cast<double>(rel_count);
            ph.hits = static_cast<long>(hits);
        }
        rep.per_head.push_back(ph);
    }

    rep.buckets = precision_by_difficulty(discovered, test,
                                          relation_difficulty(difficulty_source), bin_edges);
    return rep;
}

std::string report_text(const EvalReport& rep) {
    std::string out;
    out += "map = " + format_g12(rep.map) + "\n";
    out += "precision = " + format_g12(rep.precision) + "\n";
    out += "recall = " + format_g12(rep.recall) + "\n";
    out += "f1 = " + format_g12(rep.f1) + "\n";
    out += "heads = " + std::to_string(rep.per_head.size()) + "\n";
    return out;
}

std::string per_head_csv(const EvalReport& rep, const Vocab& vocab) {
    std::string out = "head,ap,hits\n";
    for (const auto& ph : rep.per_head) {
        out += vocab.entity_label(ph.head);
        out += ',';
        out += format_g12(ph.ap);
        out += ',';
        out += std::to_string(ph.hits);
        out += '\n';
    }
    return out;
}

std::string buckets_csv(const EvalReport& rep, const std::vector<double>& bin_edges) {
    auto edge_label = [&](int bin, bool hi) -> std::string {
        if (bin < 0) return "unknown";
        const std::size_t b = static_cast<std::size_t>(bin);
        if (hi) return b + 1 < bin_edges.size() ? format_g12(bin_edges[b + 1]) : "inf";
        return format_g12(bin_edges[b]);
    };
    std::string out = "hpt_lo,hpt_hi,tph_lo,tph_hi,count,hits,precision\n";
    for (const auto& b : rep.buckets) {
        out += edge_label(b.hpt_bin, false);
        out += ',';
        out += edge_label(b.hpt_bin, true);
        out += ',';
        out += edge_label(b.tph_bin, false);
        out += ',';
        out += edge_label(b.tph_bin, true);
        out += ',';
        out += std::to_string(b.count);
        out += ',';
        out += std::to_string(b.hits);
        out += ',';
        out += b.empty ? std::string() : format_g12(b.precision);
        out += '\n';
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "ratio,train_size,map,precision,recall,f1\n";
    for (const SweepRow& r : rows) {
        out += format_g12(r.ratio);
        out += ',';
        out += std::to_string(r.train_size);
        out += ',';
        out += format_g12(r.map);
        out += ',';
        out += format_g12(r.precision);
        out += ',';
        out += format_g12(r.recall);
        out += ',';
        out += format_g12(r.f1);
        out += '\n';
    }
    return out;
}

}  // namespace ffd
