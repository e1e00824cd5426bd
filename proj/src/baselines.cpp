#include "ffd/baselines.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace ffd {

std::pair<PairVocab, CooccurrenceMatrix> build_pair_matrix(const TripleStore& train,
                                                           int min_count) {
    if (train.facts().empty()) throw ConfigError("pair matrix needs a nonempty train set");

    std::unordered_map<std::uint64_t, int> freq;
    freq.reserve(train.size() * 2);
    for (const Triple& f : train.facts())
        ++freq[(static_cast<std::uint64_t>(f.r) << 32) | static_cast<std::uint32_t>(f.t)];

    PairVocab pv;
    pv.min_count = min_count;
    for (const auto& [key, n] : freq) {
        if (n > min_count)
            pv.pairs.emplace_back(static_cast<int>(key >> 32),
                                  static_cast<int>(key & 0xffffffffu));
    }
    std::sort(pv.pairs.begin(), pv.pairs.end());
    pv.index.reserve(pv.pairs.size() * 2);
    for (int j = 0; j < pv.size(); ++j) {
        const auto& [r, t] = pv.pairs[static_cast<std::size_t>(j)];
        pv.index.emplace((static_cast<std::uint64_t>(r) << 32) | static_cast<std::uint32_t>(t),
                         j);
    }

    CooccurrenceMatrix M;
    M.rows = train.vocab().num_entities();
    M.cols = pv.size();
    M.row_cols.assign(static_cast<std::size_t>(M.rows), {});
    for (const Triple& f : train.facts()) {
        const int j = pv.find(f.r, f.t);
        if (j >= 0) M.row_cols[static_cast<std::size_t>(f.h)].push_back(j);
    }
    for (auto& row : M.row_cols) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return {std::move(pv), std::move(M)};
}

namespace {

using EMat = Eigen::MatrixXd;

EMat to_dense(const CooccurrenceMatrix& M) {
    EMat D = EMat::Zero(M.rows, M.cols);
    for (int i = 0; i < M.rows; ++i)
        for (int j : M.row_cols[static_cast<std::size_t>(i)]) D(i, j) = 1.0;
    return D;
}

// Y = M * X, sparse 0-1 rows against dense X
EMat sparse_times(const CooccurrenceMatrix& M, const EMat& X) {
    EMat Y = EMat::Zero(M.rows, X.cols());
    for (int i = 0; i < M.rows; ++i)
        for (int j : M.row_cols[static_cast<std::size_t>(i)]) Y.row(i) += X.row(j);
    return Y;
}

// Y = M^T * X
EMat sparse_transpose_times(const CooccurrenceMatrix& M, const EMat& X) {
    EMat Y = EMat::Zero(M.cols, X.cols());
    for (int i = 0; i < M.rows; ++i)
        for (int j : M.row_cols[static_cast<std::size_t>(i)]) Y.row(j) += X.row(i);
    return Y;
}

MfFactors from_svd(const EMat& U, const Eigen::VectorXd& S, const EMat& V, int k) {
    MfFactors f;
    f.W = Mat(static_cast<int>(U.rows()), k);
    f.H = Mat(k, static_cast<int>(V.rows()));
    for (int i = 0; i < U.rows(); ++i)
        for (int a = 0; a < k; ++a) f.W(static_cast<int>(i), a) = U(i, a);
    for (int a = 0; a < k; ++a)
        for (int j = 0; j < V.rows(); ++j) f.H(a, static_cast<int>(j)) = S(a) * V(j, a);
    return f;
}

}  // namespace

MfFactors svd_factorize(const CooccurrenceMatrix& M, int k, std::uint64_t seed) {
    const int mindim = std::min(M.rows, M.cols);
    if (k < 1 || k > mindim)
        throw ConfigError("svd rank " + std::to_string(k) + " out of range [1," +
                          std::to_string(mindim) + "]");

    if (mindim <= 512) {
        const EMat D = to_dense(M);
        Eigen::BDCSVD<EMat> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
        return from_svd(svd.matrixU(), svd.singularValues(), svd.matrixV(), k);
    }

    // randomized range finder: oversampling 10, two power iterations
    const int l = std::min(k + 10, mindim);
    Rng rng(seed);
    EMat omega(M.cols, l);
    for (int i = 0; i < M.cols; ++i)
        for (int j = 0; j < l; ++j) omega(i, j) = rng.normal();

    EMat Y = sparse_times(M, omega);
    for (int it = 0; it < 2; ++it) {
        EMat Z = sparse_transpose_times(M, Y);
        Y = sparse_times(M, Z);
    }
    Eigen::HouseholderQR<EMat> qr(Y);
    EMat Q = qr.householderQ() * EMat::Identity(M.rows, l);
    EMat B = sparse_transpose_times(M, Q).transpose();  // l x cols
    Eigen::BDCSVD<EMat> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    EMat U = Q * svd.matrixU();
    return from_svd(U, svd.singularValues(), svd.matrixV(), k);
}

namespace {

double nmf_objective(const CooccurrenceMatrix& M, const Mat& W, const Mat& H) {
    const int k = W.cols();
    // ||M||^2 - 2 <M, WH> + <W^T W, H H^T>
    double t1 = static_cast<double>(M.nnz());
    double t2 = 0.0;
    for (int i = 0; i < M.rows; ++i) {
        const double* wrow = W.row(i);
        for (int j : M.row_cols[static_cast<std::size_t>(i)]) {
            double s = 0.0;
            for (int a = 0; a < k; ++a) s += wrow[a] * H(a, j);
            t2 += s;
        }
    }
    Mat WtW(k, k, 0.0), HHt(k, k, 0.0);
    for (int i = 0; i < W.rows(); ++i) {
        const double* wrow = W.row(i);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) WtW(a, b) += wrow[a] * wrow[b];
    }
    for (int j = 0; j < H.cols(); ++j)
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) HHt(a, b) += H(a, j) * H(b, j);
    double t3 = 0.0;
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) t3 += WtW(a, b) * HHt(a, b);
    return t1 - 2.0 * t2 + t3;
}

}  // namespace

MfFactors nmf_factorize(const CooccurrenceMatrix& M, int k, int iters, std::uint64_t seed,
                        std::vector<double>* objective_trace) {
    if (k < 1 || k > std::min(M.rows, M.cols))
        throw ConfigError("nmf rank out of range");
    if (iters < 0) throw ConfigError("nmf iterations must be >= 0");
    constexpr double kGuard = 1e-12;

    Rng rng(seed);
    MfFactors f;
    f.W = Mat(M.rows, k);
    f.H = Mat(k, M.cols);
    for (std::size_t i = 0; i < f.W.size(); ++i) f.W.data()[i] = rng.uniform(0.05, 1.05);
    for (std::size_t i = 0; i < f.H.size(); ++i) f.H.data()[i] = rng.uniform(0.05, 1.05);

    if (objective_trace) {
        objective_trace->clear();
        objective_trace->push_back(nmf_objective(M, f.W, f.H));
    }

    Mat WtM(k, M.cols), WtW(k, k), WtWH(k, M.cols);
    Mat MHt(M.rows, k), HHt(k, k), WHHt(M.rows, k);

    for (int iter = 0; iter < iters; ++iter) {
        // H <- H * (W^T M) / (W^T W H)
        WtM.fill(0.0);
        for (int i = 0; i < M.rows; ++i) {
            const double* wrow = f.W.row(i);
            for (int j : M.row_cols[static_cast<std::size_t>(i)])
                for (int a = 0; a < k; ++a) WtM(a, j) += wrow[a];
        }
        WtW.fill(0.0);
        for (int i = 0; i < M.rows; ++i) {
            const double* wrow = f.W.row(i);
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b) WtW(a, b) += wrow[a] * wrow[b];
        }
        WtWH.fill(0.0);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) {
                const double w = WtW(a, b);
                if (w == 0.0) continue;
                const double* hrow = f.H.row(b);
                double* out = WtWH.row(a);
                for (int j = 0; j < M.cols; ++j) out[j] += w * hrow[j];
            }
        for (int a = 0; a < k; ++a)
            for (int j = 0; j < M.cols; ++j)
                f.H(a, j) *= WtM(a, j) / (WtWH(a, j) + kGuard);

        // W <- W * (M H^T) / (W H H^T)
        MHt.fill(0.0);
        for (int i = 0; i < M.rows; ++i) {
            double* out = MHt.row(i);
            for (int j : M.row_cols[static_cast<std::size_t>(i)])
                for (int a = 0; a < k; ++a) out[a] += f.H(a, j);
        }
        HHt.fill(0.0);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) {
                double s = 0.0;
                const double* ha = f.H.row(a);
                const double* hb = f.H.row(b);
                for (int j = 0; j < M.cols; ++j) s += ha[j] * hb[j];
                HHt(a, b) = s;
            }
        WHHt.fill(0.0);
        for (int i = 0; i < M.rows; ++i) {
            const double* wrow = f.W.row(i);
            double* out = WHHt.row(i);
            for (int a = 0; a < k; ++a) {
                const double w = wrow[a];
                if (w == 0.0) continue;
                for (int b = 0; b < k; ++b) out[b] += w * HHt(a, b);
            }
        }
        for (int i = 0; i < M.rows; ++i)
            for (int a = 0; a < k; ++a)
                f.W(i, a) *= MHt(i, a) / (WHHt(i, a) + kGuard);

        if (objective_trace) objective_trace->push_back(nmf_objective(M, f.W, f.H));
    }
    return f;
}

std::vector<ScoredFact> mf_predict(const MfFactors& f, const PairVocab& pv, int head,
                                   int k_bar, const TripleStore& train,
                                   bool exclude_known) {
    if (f.W.empty() || f.H.empty()) throw StateError("mf factors are empty");
    if (head < 0 || head >= f.W.rows())
        throw LookupError("head id out of range: " + std::to_string(head));
    if (k_bar < 1) throw ConfigError("k_bar must be >= 1");
    const int k = f.W.cols();
    const int p = f.H.cols();
    if (p != pv.size()) throw ContractError("factor width does not match pair vocab");

    struct Cand {
        double s;
        int r;
        int t;
    };
    std::vector<Cand> cands;
    cands.reserve(static_cast<std::size_t>(p));
    const double* wrow = f.W.row(head);
    for (int j = 0; j < p; ++j) {
        const auto& [r, t] = pv.pairs[static_cast<std::size_t>(j)];
        if (exclude_known && train.contains(head, r, t)) continue;
        double s = 0.0;
        for (int a = 0; a < k; ++a) s += wrow[a] * f.H(a, j);
        cands.push_back({s, r, t});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.s != b.s) return a.s > b.s;
        if (a.r != b.r) return a.r < b.r;
        return a.t < b.t;
    });
    if (cands.size() > static_cast<std::size_t>(k_bar))
        cands.resize(static_cast<std::size_t>(k_bar));

    std::vector<ScoredFact> out;
    out.reserve(cands.size());
    for (const Cand& c : cands) {
        ScoredFact sf;
        sf.triple = Triple{head, c.r, c.t};
        sf.f_h_r = sf.f_t_r = sf.f_hr_t = c.s;
        sf.confidence = c.s;
        out.push_back(sf);
    }
    return out;
}

}  // namespace ffd
