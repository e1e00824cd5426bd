#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ffd/discovery.hpp"
#include "ffd/kb.hpp"
#include "ffd/util.hpp"

namespace ffd {

// Columns of the co-occurrence matrix: (relation, tail) pairs whose training
// frequency is strictly greater than min_count, ordered by (relation, tail).
struct PairVocab {
    std::vector<std::pair<int, int>> pairs;
    std::unordered_map<std::uint64_t, int> index;
    int min_count = 0;

    int find(int r, int t) const {
        auto it = index.find((static_cast<std::uint64_t>(r) << 32) |
                             static_cast<std::uint32_t>(t));
        return it == index.end() ? -1 : it->second;
    }
    int size() const { return static_cast<int>(pairs.size()); }
};

// 0-1 sparse matrix, one row per entity, kept as sorted column lists.
struct CooccurrenceMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<int>> row_cols;

    std::size_t nnz() const {
        std::size_t n = 0;
        for (const auto& r : row_cols) n += r.size();
        return n;
    }
};

std::pair<PairVocab, CooccurrenceMatrix> build_pair_matrix(const TripleStore& train,
                                                           int min_count);

struct MfFactors {
    Mat W;  // |E| x k
    Mat H;  // k x p
};

// Truncated SVD with singular values absorbed into H (W = U, H = S V^T).
// Small problems (min dim <= 512) use an exact dense solver; larger ones use
// randomized projection with oversampling 10 and 2 power iterations.
MfFactors svd_factorize(const CooccurrenceMatrix& M, int k, std::uint64_t seed = 0);

// Lee-Seung multiplicative updates on the Frobenius objective from a seeded
// positive random init. Pass objective_trace to record the objective after
// each iteration (index 0 holds the pre-iteration objective).
MfFactors nmf_factorize(const CooccurrenceMatrix& M, int k, int iters,
                        std::uint64_t seed = 0,
                        std::vector<double>* objective_trace = nullptr);

// Rank the head's reconstructed row and map columns back to (relation, tail)
// pairs, discovery tie-breaking. Facet fields all carry the MF score.
std::vector<ScoredFact> mf_predict(const MfFactors& f, const PairVocab& pv, int head,
                                   int k_bar, const TripleStore& train,
                                   bool exclude_known);

}  // namespace ffd
