#pragma once

#include <string>
#include <vector>

#include "ffd/autoencoder.hpp"
#include "ffd/kb.hpp"
#include "ffd/kbr.hpp"

namespace ffd {

struct DiscoveryConfig {
    int n_h = 30;   // relations kept by the head facet
    int n_t = 30;   // tails kept per relation by the tail facet
    int n_f = 10;   // triples kept per (head, relation) by the tail-inference facet
    int k_bar = 50;  // facts returned per head
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double lambda3 = 0.5;
    bool exclude_known = true;
    // scope of the n_f cache: per (head, relation) keeps relation diversity;
    // per head pools all surviving triples before the n_f cut
    enum class CacheScope { per_relation, per_head };
    CacheScope cache_scope = CacheScope::per_relation;
};

struct ScoredFact {
    Triple triple{-1, -1, -1};
    double f_h_r = 0.0;
    double f_t_r = 0.0;
    double f_hr_t = 0.0;
    double confidence = 0.0;
};

double confidence(double f_h_r, double f_t_r, double f_hr_t, const DiscoveryConfig& cfg);

// Tail facet scores f_t(r) for every entity, materialized once per trained
// tail auto-encoder and shared across heads.
class TailFacetTable {
  public:
    TailFacetTable() = default;
    TailFacetTable(const AutoencoderParams& tail_ae, const TripleStore& train);

    bool ready() const { return !scores_.empty(); }
    int num_entities() const { return scores_.rows(); }
    int num_relations() const { return scores_.cols(); }
    double at(int entity, int relation) const { return scores_(entity, relation); }

    // per relation, entity ids ranked by (score desc, id asc), cut at n_t
    std::vector<std::vector<int>> top_tails(int n_t) const;

  private:
    Mat scores_;  // |E| x |R|
};

// Candidate pool after facet pruning and the known-fact filter, before the
// final top-K cut. Exposed so pruning monotonicity is testable.
std::vector<ScoredFact> discover_candidates(int h, const AutoencoderParams& head_ae,
                                            const TailFacetTable& tail_facet,
                                            const std::vector<std::vector<int>>& top_tails,
                                            const KbrModel& model, const TripleStore& train,
                                            const DiscoveryConfig& cfg);

std::vector<ScoredFact> discover_for_head(int h, const AutoencoderParams& head_ae,
                                          const TailFacetTable& tail_facet,
                                          const std::vector<std::vector<int>>& top_tails,
                                          const KbrModel& model, const TripleStore& train,
                                          const DiscoveryConfig& cfg);

// Convenience form that builds the tail facet table ad hoc.
std::vector<ScoredFact> discover_for_head(int h, const AutoencoderParams& head_ae,
                                          const AutoencoderParams& tail_ae,
                                          const KbrModel& model, const TripleStore& train,
                                          const DiscoveryConfig& cfg);

// Union of per-head results, heads processed in ascending id order.
std::vector<ScoredFact> discover_all(const std::vector<int>& heads,
                                     const AutoencoderParams& head_ae,
                                     const AutoencoderParams& tail_ae, const KbrModel& model,
                                     const TripleStore& train, const DiscoveryConfig& cfg);
std::vector<ScoredFact> discover_all(const std::vector<int>& heads,
                                     const AutoencoderParams& head_ae,
                                     const TailFacetTable& tail_facet, const KbrModel& model,
                                     const TripleStore& train, const DiscoveryConfig& cfg);

// Baseline: score every (relation, tail) pair for the head and rank by the
// grid-normalized log probability. Same tie-breaking as discovery.
std::vector<ScoredFact> exhaustive_kbr_rank(const KbrModel& model, int h, int k_bar,
                                            const TripleStore& train, bool exclude_known);

// TSV: head, relation, tail, confidence, f_h, f_t, f_hrt.
void save_scored_facts(const std::vector<ScoredFact>& facts, const Vocab& vocab,
                       const std::string& path);
std::vector<ScoredFact> load_scored_facts(const std::string& path, const Vocab& vocab);

}  // namespace ffd
