#include "ffd/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ffd {

namespace {

constexpr double kLogClamp = 1e-12;

double clamp_prob(double p) {
    return std::min(1.0 - kLogClamp, std::max(kLogClamp, p));
}

double sigmoid(double v) {
    if (v >= 0.0) {
        const double z = std::exp(-v);
        return 1.0 / (1.0 + z);
    }
    const double z = std::exp(v);
    return z / (1.0 + z);
}

std::vector<int> active_bits(std::span<const std::uint8_t> y) {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(y.size()); ++i)
        if (y[i]) idx.push_back(i);
    return idx;
}

void check_dims(const AutoencoderParams& p, std::size_t len, const char* what) {
    if (static_cast<int>(len) != p.num_relations)
        throw ContractError(std::string(what) + " length " + std::to_string(len) +
                            " does not match model relation count " +
                            std::to_string(p.num_relations));
}

}  // namespace

std::vector<std::uint8_t> corrupt(const RelationProfile& profile, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw ConfigError("corruption rate must lie in [0,1), got " + format_g12(rate));
    std::vector<std::uint8_t> out(profile.bits.begin(), profile.bits.end());
    std::vector<int> ones;
    for (int i = 0; i < static_cast<int>(out.size()); ++i)
        if (out[i]) ones.push_back(i);
    if (ones.empty()) return out;
    int surviving = static_cast<int>(ones.size());
    for (int i : ones) {
        if (rng.uniform() < rate) {
            out[static_cast<std::size_t>(i)] = 0;
            --surviving;
        }
    }
    if (surviving == 0) {
        int keep = ones[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(ones.size())))];
        out[static_cast<std::size_t>(keep)] = 1;
    }
    return out;
}

std::vector<double> encode(const AutoencoderParams& p, std::span<const std::uint8_t> yprime) {
    check_dims(p, yprime.size(), "encode input");
    std::vector<double> x(static_cast<std::size_t>(p.d1));
    const std::vector<int> act = active_bits(yprime);
    for (int i = 0; i < p.d1; ++i) {
        double u = p.b_f[static_cast<std::size_t>(i)];
        const double* wrow = p.W_f.row(i);
        for (int j : act) u += wrow[j];
        x[static_cast<std::size_t>(i)] = std::tanh(u);
    }
    return x;
}

std::vector<double> decode(const AutoencoderParams& p, std::span<const double> x) {
    if (static_cast<int>(x.size()) != p.d1)
        throw ContractError("decode input length " + std::to_string(x.size()) +
                            " does not match hidden width " + std::to_string(p.d1));
    std::vector<double> y(static_cast<std::size_t>(p.num_relations));
    for (int i = 0; i < p.num_relations; ++i) {
        double v = p.b_g[static_cast<std::size_t>(i)];
        const double* wrow = p.W_g.row(i);
        for (int j = 0; j < p.d1; ++j) v += wrow[j] * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = sigmoid(v);
    }
    return y;
}

double reconstruction_loss(std::span<const std::uint8_t> y, std::span<const double> ytilde) {
    if (y.size() != ytilde.size())
        throw ContractError("reconstruction_loss length mismatch");
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double p = clamp_prob(ytilde[i]);
        loss -= y[i] ? std::log(p) : std::log(1.0 - p);
    }
    return loss;
}

double ae_batch_loss(const AutoencoderParams& params,
                     const std::vector<std::vector<std::uint8_t>>& y,
                     const std::vector<std::vector<std::uint8_t>>& yprime) {
    if (y.size() != yprime.size()) throw ContractError("batch size mismatch");
    double loss = 0.0;
    for (std::size_t e = 0; e < y.size(); ++e) {
        std::vector<double> x = encode(params, yprime[e]);
        std::vector<double> yt = decode(params, x);
        loss += reconstruction_loss(y[e], yt);
    }
    return loss;
}

AeGradients ae_batch_grad(const AutoencoderParams& params,
                          const std::vector<std::vector<std::uint8_t>>& y,
                          const std::vector<std::vector<std::uint8_t>>& yprime,
                          double* loss_out) {
    if (y.size() != yprime.size()) throw ContractError("batch size mismatch");
    const int R = params.num_relations;
    const int d1 = params.d1;
    const int B = static_cast<int>(y.size());

    // per-entity forward pass results
    std::vector<std::vector<double>> xs(static_cast<std::size_t>(B));
    std::vector<std::vector<double>> diffs(static_cast<std::size_t>(B));   // ytilde - y
    std::vector<std::vector<double>> deltas(static_cast<std::size_t>(B));  // dL/du
    std::vector<std::vector<int>> acts(static_cast<std::size_t>(B));
    std::vector<double> losses(static_cast<std::size_t>(B), 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int e = 0; e < B; ++e) {
        const auto eu = static_cast<std::size_t>(e);
        acts[eu] = active_bits(yprime[eu]);
        std::vector<double> x = encode(params, yprime[eu]);
        std::vector<double> yt = decode(params, x);
        losses[eu] = reconstruction_loss(y[eu], yt);
        std::vector<double> diff(static_cast<std::size_t>(R));
        for (int i = 0; i < R; ++i)
            diff[static_cast<std::size_t>(i)] =
                yt[static_cast<std::size_t>(i)] - static_cast<double>(y[eu][static_cast<std::size_t>(i)]);
        std::vector<double> delta(static_cast<std::size_t>(d1), 0.0);
        for (int j = 0; j < d1; ++j) {
            double s = 0.0;
            for (int i = 0; i < R; ++i)
                s += params.W_g(i, j) * diff[static_cast<std::size_t>(i)];
            const double xj = x[static_cast<std::size_t>(j)];
            delta[static_cast<std::size_t>(j)] = s * (1.0 - xj * xj);
        }
        xs[eu] = std::move(x);
        diffs[eu] = std::move(diff);
        deltas[eu] = std::move(delta);
    }

    AeGradients g;
    g.W_f = Mat(d1, R, 0.0);
    g.b_f.assign(static_cast<std::size_t>(d1), 0.0);
    g.W_g = Mat(R, d1, 0.0);
    g.b_g.assign(static_cast<std::size_t>(R), 0.0);

    // one writer per output row keeps accumulation order fixed
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < R; ++i) {
        double* wrow = g.W_g.row(i);
        double bg = 0.0;
        for (int e = 0; e < B; ++e) {
            const auto eu = static_cast<std::size_t>(e);
            const double d = diffs[eu][static_cast<std::size_t>(i)];
            bg += d;
            const double* xe = xs[eu].data();
            for (int j = 0; j < d1; ++j) wrow[j] += d * xe[j];
        }
        g.b_g[static_cast<std::size_t>(i)] = bg;
    }

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int j = 0; j < d1; ++j) {
        double* wrow = g.W_f.row(j);
        double bf = 0.0;
        for (int e = 0; e < B; ++e) {
            const auto eu = static_cast<std::size_t>(e);
            const double d = deltas[eu][static_cast<std::size_t>(j)];
            bf += d;
            for (int a : acts[eu]) wrow[a] += d;
        }
        g.b_f[static_cast<std::size_t>(j)] = bf;
    }

    if (loss_out) *loss_out = std::accumulate(losses.begin(), losses.end(), 0.0);
    return g;
}

AeTrainResult train_autoencoder(const std::vector<RelationProfile>& profiles,
                                const AeTrainConfig& cfg,
                                const AutoencoderParams* resume_from) {
    if (cfg.epochs < 1) throw ConfigError("ae epochs must be >= 1");
    if (cfg.learning_rate <= 0.0) throw ConfigError("ae learning rate must be > 0");
    if (cfg.batch_size < 1) throw ConfigError("ae batch size must be >= 1");
    if (cfg.d1 < 1) throw ConfigError("ae hidden width must be >= 1");
    if (cfg.corruption_rate < 0.0 || cfg.corruption_rate >= 1.0)
        throw ConfigError("ae corruption rate must lie in [0,1)");

    std::vector<const RelationProfile*> kept;
    int R = -1;
    for (const RelationProfile& p : profiles) {
        if (R < 0)
            R = static_cast<int>(p.bits.size());
        else if (R != static_cast<int>(p.bits.size()))
            throw ContractError("profiles disagree on relation count");
        if (std::find(p.bits.begin(), p.bits.end(), std::uint8_t(1)) != p.bits.end())
            kept.push_back(&p);
    }
    if (kept.empty()) throw ConfigError("training needs at least one nonempty profile");

    Rng rng(cfg.seed);

    AutoencoderParams params;
    if (resume_from) {
        if (!resume_from->trained()) throw StateError("resume source is untrained");
        if (resume_from->num_relations != R)
            throw ConfigError("resume model relation count mismatch");
        params = *resume_from;
    } else {
        params.d1 = cfg.d1;
        params.num_relations = R;
        params.W_f = Mat(cfg.d1, R);
        params.b_f.assign(static_cast<std::size_t>(cfg.d1), 0.0);
        params.W_g = Mat(R, cfg.d1);
        params.b_g.assign(static_cast<std::size_t>(R), 0.0);
        const double limit = std::sqrt(6.0 / (static_cast<double>(R) + cfg.d1));
        for (std::size_t i = 0; i < params.W_f.size(); ++i)
            params.W_f.data()[i] = rng.uniform(-limit, limit);
        for (std::size_t i = 0; i < params.W_g.size(); ++i)
            params.W_g.data()[i] = rng.uniform(-limit, limit);
    }
    Adam opt_wf(params.W_f.size(), cfg.learning_rate);
    Adam opt_bf(params.b_f.size(), cfg.learning_rate);
    Adam opt_wg(params.W_g.size(), cfg.learning_rate);
    Adam opt_bg(params.b_g.size(), cfg.learning_rate);

    std::vector<int> order(kept.size());
    std::iota(order.begin(), order.end(), 0);

    AeTrainResult result;
    result.epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<std::vector<std::uint8_t>> ys, yps;
            ys.reserve(stop - start);
            yps.reserve(stop - start);
            for (std::size_t k = start; k < stop; ++k) {
                const RelationProfile& p = *kept[static_cast<std::size_t>(order[k])];
                ys.emplace_back(p.bits.begin(), p.bits.end());
                yps.push_back(corrupt(p, cfg.corruption_rate, rng));
            }
            double batch_loss = 0.0;
            AeGradients g = ae_batch_grad(params, ys, yps, &batch_loss);
            epoch_loss += batch_loss;
            opt_wf.step({params.W_f.data(), params.W_f.size()},
                        {g.W_f.data(), g.W_f.size()});
            opt_bf.step(params.b_f, g.b_f);
            opt_wg.step({params.W_g.data(), params.W_g.size()},
                        {g.W_g.data(), g.W_g.size()});
            opt_bg.step(params.b_g, g.b_g);
        }
        if (!std::isfinite(epoch_loss))
            throw TrainingError("non-finite training loss", epoch);
        result.epoch_loss.push_back(epoch_loss);
    }

    result.params = std::move(params);
    return result;
}

std::vector<double> predict_relation_scores(const AutoencoderParams& params,
                                            const RelationProfile& profile) {
    if (!params.trained()) throw StateError("autoencoder is untrained");
    check_dims(params, profile.bits.size(), "profile");
    const bool empty = std::find(profile.bits.begin(), profile.bits.end(),
                                 std::uint8_t(1)) == profile.bits.end();
    std::vector<double> scores(static_cast<std::size_t>(params.num_relations));
    if (empty) {
        std::fill(scores.begin(), scores.end(), std::log(0.5));
        return scores;
    }
    std::vector<std::uint8_t> bits(profile.bits.begin(), profile.bits.end());
    std::vector<double> x = encode(params, bits);
    std::vector<double> yt = decode(params, x);
    for (std::size_t i = 0; i < yt.size(); ++i) scores[i] = std::log(clamp_prob(yt[i]));
    return scores;
}

std::vector<RelationProfile> collect_profiles(const TripleStore& store, Role role) {
    const int ne = static_cast<int>(store.vocab().num_entities());
    std::vector<RelationProfile> out;
    out.reserve(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) out.push_back(relation_profile(store, e, role));
    return out;
}

void save_autoencoder(const AutoencoderParams& params, const std::string& path) {
    if (!params.trained()) throw StateError("refusing to save untrained autoencoder");
    BinWriter w;
    w.magic("FFDAE001");
    w.u32(static_cast<std::uint32_t>(params.d1));
    w.u32(static_cast<std::uint32_t>(params.num_relations));
    w.f64s({params.W_f.data(), params.W_f.size()});
    w.f64s(params.b_f);
    w.f64s({params.W_g.data(), params.W_g.size()});
    w.f64s(params.b_g);
    write_file_atomic(path, w.buffer());
}

AutoencoderParams load_autoencoder(const std::string& path) {
    BinReader r(read_file(path));
    r.expect_magic("FFDAE001", "autoencoder model");
    AutoencoderParams p;
    p.d1 = static_cast<int>(r.u32());
    p.num_relations = static_cast<int>(r.u32());
    if (p.d1 < 1 || p.num_relations < 1)
        throw ParseError("autoencoder model has invalid dimensions: " + path);
    p.W_f = Mat(p.d1, p.num_relations);
    p.b_f.resize(static_cast<std::size_t>(p.d1));
    p.W_g = Mat(p.num_relations, p.d1);
    p.b_g.resize(static_cast<std::size_t>(p.num_relations));
    r.f64s({p.W_f.data(), p.W_f.size()});
    r.f64s(p.b_f);
    r.f64s({p.W_g.data(), p.W_g.size()});
    r.f64s(p.b_g);
    if (!r.done()) throw ParseError("trailing bytes in autoencoder model: " + path);
    return p;
}

}  // namespace ffd
