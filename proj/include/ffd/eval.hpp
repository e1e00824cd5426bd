#pragma once

#include <map>
#include <string>
#include <vector>

#include "ffd/discovery.hpp"
#include "ffd/kb.hpp"

namespace ffd {

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

PrecisionRecall precision_recall_f1(const std::vector<Triple>& discovered,
                                    const TripleStore& test);
PrecisionRecall precision_recall_f1(const std::vector<ScoredFact>& discovered,
                                    const TripleStore& test);

// Mean average precision over heads with at least one test fact. Rankings
// must be sorted by confidence descending (checked). AP uses the full
// relevant-count denominator. micro pools AP mass over facts instead of
// averaging per head.
double map_score(const std::map<int, std::vector<ScoredFact>>& per_head_rankings,
                 const TripleStore& test, bool micro = false);

std::map<int, std::vector<ScoredFact>> group_by_head(const std::vector<ScoredFact>& facts);

struct RelationDifficulty {
    int relation = -1;
    double hpt = 0.0;  // facts / distinct tails
    double tph = 0.0;  // facts / distinct heads
};

// One entry per relation with at least one fact, ascending relation id.
std::vector<RelationDifficulty> relation_difficulty(const TripleStore& store);

struct DifficultyBucket {
    int hpt_bin = -1;  // -1 marks relations absent from the difficulty table
    int tph_bin = -1;
    long count = 0;
    long hits = 0;
    bool empty = true;
    double precision = 0.0;
};

// Group discovered facts by their relation's (hpt, tph) bucket on the given
// monotone bin edges (last bucket open-ended) and compute per-bucket
// precision. Buckets with no discovered facts are marked empty.
std::vector<DifficultyBucket> precision_by_difficulty(
    const std::vector<ScoredFact>& discovered, const TripleStore& test,
    const std::vector<RelationDifficulty>& difficulties,
    const std::vector<double>& bin_edges);

extern const std::vector<double> kDefaultDifficultyBins;

struct EvalReport {
    double map = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    struct PerHead {
        int head = -1;
        double ap = 0.0;
        long hits = 0;
    };
    std::vector<PerHead> per_head;
    std::vector<DifficultyBucket> buckets;
};

EvalReport evaluate(const std::vector<ScoredFact>& discovered, const TripleStore& test,
                    const TripleStore& difficulty_source,
                    const std::vector<double>& bin_edges = kDefaultDifficultyBins,
                    bool micro = false);

std::string report_text(const EvalReport& report);
std::string per_head_csv(const EvalReport& report, const Vocab& vocab);
std::string buckets_csv(const EvalReport& report, const std::vector<double>& bin_edges);

struct SweepRow {
    double ratio = 0.0;
    std::size_t train_size = 0;
    double map = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace ffd
