#include "ffd/kbr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace ffd {

namespace {

double sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double z = std::exp(v);
    return z / (1.0 + z);
}

double softplus(double v) {
    return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
}

void check_ids(const KbrModel& m, int h, int r, int t) {
    if (!m.trained()) throw StateError("kbr model is untrained");
    if (h < 0 || h >= m.num_entities || t < 0 || t >= m.num_entities)
        throw LookupError("entity id out of range");
    if (r < 0 || r >= m.num_relations) throw LookupError("relation id out of range");
}

// accumulate coef * ds/dh, coef * ds/dr, coef * ds/dt for one scored triple
void accumulate_triple_grad(const KbrModel& m, int h, int r, int t, double coef,
                            double* gh, double* gr, double* gt) {
    const double* he = m.entity_emb.row(h);
    const double* re = m.relation_emb.row(r);
    const double* te = m.entity_emb.row(t);
    const int d = m.dim;
    switch (m.kind) {
        case KbrKind::distmult:
            for (int i = 0; i < d; ++i) {
                gh[i] += coef * re[i] * te[i];
                gr[i] += coef * he[i] * te[i];
                gt[i] += coef * he[i] * re[i];
            }
            break;
        case KbrKind::complex_:
            for (int k = 0; k < d; k += 2) {
                const double hre = he[k], him = he[k + 1];
                const double rre = re[k], rim = re[k + 1];
                const double tre = te[k], tim = te[k + 1];
                gh[k] += coef * (rre * tre + rim * tim);
                gh[k + 1] += coef * (-rim * tre + rre * tim);
                gr[k] += coef * (hre * tre + him * tim);
                gr[k + 1] += coef * (-him * tre + hre * tim);
                gt[k] += coef * (hre * rre - him * rim);
                gt[k + 1] += coef * (hre * rim + him * rre);
            }
            break;
        case KbrKind::analogy:
            for (int k = 0; k < d; k += 2) {
                const double h0 = he[k], h1 = he[k + 1];
                const double a = re[k], b = re[k + 1];
                const double t0 = te[k], t1 = te[k + 1];
                gh[k] += coef * (a * t0 + b * t1);
                gh[k + 1] += coef * (a * t1 - b * t0);
                gr[k] += coef * (h0 * t0 + h1 * t1);
                gr[k + 1] += coef * (h0 * t1 - h1 * t0);
                gt[k] += coef * (a * h0 - b * h1);
                gt[k + 1] += coef * (a * h1 + b * h0);
            }
            break;
    }
}

}  // namespace

KbrKind parse_kbr_kind(std::string_view name) {
    if (name == "distmult") return KbrKind::distmult;
    if (name == "complex") return KbrKind::complex_;
    if (name == "analogy") return KbrKind::analogy;
    throw ConfigError("unknown kbr kind: " + std::string(name));
}

std::string kbr_kind_name(KbrKind kind) {
    switch (kind) {
        case KbrKind::distmult: return "distmult";
        case KbrKind::complex_: return "complex";
        case KbrKind::analogy: return "analogy";
    }
    return "?";
}

KbrLoss parse_kbr_loss(std::string_view name) {
    if (name == "margin") return KbrLoss::margin;
    if (name == "logistic") return KbrLoss::logistic;
    throw ConfigError("unknown kbr loss '" + std::string(name) +
                      "' (expected margin or logistic)");
}

std::string kbr_loss_name(KbrLoss loss) {
    return loss == KbrLoss::margin ? "margin" : "logistic";
}

KbrLoss default_kbr_loss(KbrKind kind) {
    return kind == KbrKind::distmult ? KbrLoss::margin : KbrLoss::logistic;
}

void tail_combo(const KbrModel& m, int h, int r, std::span<double> out) {
    if (static_cast<int>(out.size()) != m.dim) throw ContractError("combo size mismatch");
    const double* he = m.entity_emb.row(h);
    const double* re = m.relation_emb.row(r);
    const int d = m.dim;
    switch (m.kind) {
        case KbrKind::distmult:
            for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = he[i] * re[i];
            break;
        case KbrKind::complex_:
            // Re(h * r * conj(t)) = c . t with c = (hre*rre - him*rim, hre*rim + him*rre)
            for (int k = 0; k < d; k += 2) {
                out[static_cast<std::size_t>(k)] = he[k] * re[k] - he[k + 1] * re[k + 1];
                out[static_cast<std::size_t>(k + 1)] = he[k] * re[k + 1] + he[k + 1] * re[k];
            }
            break;
        case KbrKind::analogy:
            // h^T M_r t = c . t with c = (a*h0 - b*h1, a*h1 + b*h0) per block
            for (int k = 0; k < d; k += 2) {
                out[static_cast<std::size_t>(k)] = re[k] * he[k] - re[k + 1] * he[k + 1];
                out[static_cast<std::size_t>(k + 1)] = re[k] * he[k + 1] + re[k + 1] * he[k];
            }
            break;
    }
}

double score(const KbrModel& m, int h, int r, int t) {
    check_ids(m, h, r, t);
    std::vector<double> c(static_cast<std::size_t>(m.dim));
    tail_combo(m, h, r, c);
    const double* te = m.entity_emb.row(t);
    double s = 0.0;
    for (int i = 0; i < m.dim; ++i) s += c[static_cast<std::size_t>(i)] * te[i];
    return s;
}

void score_all_tails(const KbrModel& m, int h, int r, std::span<double> out) {
    check_ids(m, h, r, 0);
    if (static_cast<int>(out.size()) != m.num_entities)
        throw ContractError("score buffer size mismatch");
    std::vector<double> c(static_cast<std::size_t>(m.dim));
    tail_combo(m, h, r, c);
    const int d = m.dim;
    for (int t = 0; t < m.num_entities; ++t) {
        const double* te = m.entity_emb.row(t);
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += c[static_cast<std::size_t>(i)] * te[i];
        out[static_cast<std::size_t>(t)] = s;
    }
}

std::vector<double> tail_log_softmax(const KbrModel& m, int h, int r) {
    std::vector<double> s(static_cast<std::size_t>(m.num_entities));
    score_all_tails(m, h, r, s);
    const double lse = logsumexp(s);
    for (double& v : s) v -= lse;
    return s;
}

Mat joint_log_softmax(const KbrModel& m, int h) {
    check_ids(m, h, 0, 0);
    Mat grid(m.num_relations, m.num_entities);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int r = 0; r < m.num_relations; ++r)
        score_all_tails(m, h, r, {grid.row(r), static_cast<std::size_t>(m.num_entities)});
    const double lse = logsumexp({grid.data(), grid.size()});
    for (std::size_t i = 0; i < grid.size(); ++i) grid.data()[i] -= lse;
    return grid;
}

double kbr_item_loss(const KbrModel& m, const KbrBatchItem& item, KbrLoss loss,
                     double margin, double l2) {
    const double s_pos = score(m, item.pos.h, item.pos.r, item.pos.t);
    double total = 0.0;
    if (loss == KbrLoss::margin) {
        for (const Triple& n : item.negs)
            total += std::max(0.0, margin - s_pos + score(m, n.h, n.r, n.t));
    } else {
        total += softplus(-s_pos);
        for (const Triple& n : item.negs) total += softplus(score(m, n.h, n.r, n.t));
    }
    if (l2 > 0.0) {
        auto row_sq = [&](const Mat& mat, int row) {
            const double* p = mat.row(row);
            double s = 0.0;
            for (int i = 0; i < m.dim; ++i) s += p[i] * p[i];
            return s;
        };
        auto triple_sq = [&](const Triple& f) {
            return row_sq(m.entity_emb, f.h) + row_sq(m.relation_emb, f.r) +
                   row_sq(m.entity_emb, f.t);
        };
        total += l2 * triple_sq(item.pos);
        for (const Triple& n : item.negs) total += l2 * triple_sq(n);
    }
    return total;
}

KbrItemGrad kbr_item_grad(const KbrModel& m, const KbrBatchItem& item, KbrLoss loss,
                          double margin, double l2) {
    KbrItemGrad out;
    const auto du = static_cast<std::size_t>(m.dim);
    auto row_grad = [du](std::vector<std::pair<int, std::vector<double>>>& rows,
                         int id) -> double* {
        for (auto& [rid, g] : rows)
            if (rid == id) return g.data();
        rows.emplace_back(id, std::vector<double>(du, 0.0));
        return rows.back().second.data();
    };
    auto add_triple = [&](const Triple& f, double coef) {
        double* gh = row_grad(out.entity_rows, f.h);
        double* gt = row_grad(out.entity_rows, f.t);
        double* gr = row_grad(out.relation_rows, f.r);
        if (f.h == f.t) gt = gh;  // self-loop: one row, gradients sum
        accumulate_triple_grad(m, f.h, f.r, f.t, coef, gh, gr, gt);
    };

    const double s_pos = score(m, item.pos.h, item.pos.r, item.pos.t);
    if (loss == KbrLoss::margin) {
        for (const Triple& n : item.negs) {
            const double s_neg = score(m, n.h, n.r, n.t);
            const double term = margin - s_pos + s_neg;
            out.loss += std::max(0.0, term);
            if (term > 0.0) {
                add_triple(item.pos, -1.0);
                add_triple(n, 1.0);
            }
        }
    } else {
        out.loss += softplus(-s_pos);
        add_triple(item.pos, -sigmoid(-s_pos));
        for (const Triple& n : item.negs) {
            const double s_neg = score(m, n.h, n.r, n.t);
            out.loss += softplus(s_neg);
            add_triple(n, sigmoid(s_neg));
        }
    }

    if (l2 > 0.0) {
        auto add_l2 = [&](const Triple& f) {
            double* gh = row_grad(out.entity_rows, f.h);
            double* gt = row_grad(out.entity_rows, f.t);
            double* gr = row_grad(out.relation_rows, f.r);
            if (f.h == f.t) gt = gh;
            const double* he = m.entity_emb.row(f.h);
            const double* te = m.entity_emb.row(f.t);
            const double* re = m.relation_emb.row(f.r);
            double lsq = 0.0;
            for (int i = 0; i < m.dim; ++i) {
                gh[i] += 2.0 * l2 * he[i];
                gt[i] += 2.0 * l2 * te[i];
                gr[i] += 2.0 * l2 * re[i];
                lsq += he[i] * he[i] + te[i] * te[i] + re[i] * re[i];
            }
            out.loss += l2 * lsq;
        };
        add_l2(item.pos);
        for (const Triple& n : item.negs) add_l2(n);
    }
    return out;
}

namespace {

void validate_kbr_config(const KbrTrainConfig& cfg) {
    if (cfg.dim < 1) throw ConfigError("kbr dim must be >= 1");
    if ((cfg.kind == KbrKind::complex_ || cfg.kind == KbrKind::analogy) && cfg.dim % 2)
        throw ConfigError("kbr dim must be even for " + kbr_kind_name(cfg.kind));
    if (cfg.epochs < 1) throw ConfigError("kbr epochs must be >= 1");
    if (cfg.learning_rate <= 0.0) throw ConfigError("kbr learning rate must be > 0");
    if (cfg.batch_size < 1) throw ConfigError("kbr batch size must be >= 1");
    if (cfg.negatives_per_positive < 1) throw ConfigError("kbr negatives must be >= 1");
    if (cfg.loss == KbrLoss::margin && cfg.margin <= 0.0)
        throw ConfigError("margin must be > 0 for margin loss");
    if (cfg.l2 < 0.0) throw ConfigError("kbr l2 must be >= 0");
}

std::vector<KbrBatchItem> draw_epoch_items(const TripleStore& train,
                                           const std::vector<Triple>& facts,
                                           std::vector<int>& order, int negs, Rng& rng,
                                           int num_entities) {
    rng.shuffle(order);
    std::vector<KbrBatchItem> items(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Triple pos = facts[static_cast<std::size_t>(order[i])];
        items[i].pos = pos;
        items[i].negs.reserve(static_cast<std::size_t>(negs));
        for (int k = 0; k < negs; ++k) {
            const bool corrupt_head = rng.uniform_int(2) == 0;
            Triple neg = pos;
            bool ok = false;
            for (int attempt = 0; attempt < 100; ++attempt) {
                const int e = rng.uniform_int(num_entities);
                if (corrupt_head)
                    neg.h = e;
                else
                    neg.t = e;
                if (!train.contains(neg.h, neg.r, neg.t)) {
                    ok = true;
                    break;
                }
            }
            if (ok) items[i].negs.push_back(neg);
        }
    }
    return items;
}

double epoch_pass(KbrModel& model, const std::vector<KbrBatchItem>& items,
                  const KbrTrainConfig& cfg, Adam& opt_ent, Adam& opt_rel,
                  Mat& ent_grad, Mat& rel_grad) {
    const int d = model.dim;
    double total_loss = 0.0;
    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
    std::vector<KbrItemGrad> grads;
    for (std::size_t start = 0; start < items.size(); start += bs) {
        const std::size_t stop = std::min(items.size(), start + bs);
        grads.assign(stop - start, KbrItemGrad{});
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long k = 0; k < static_cast<long>(stop - start); ++k)
            grads[static_cast<std::size_t>(k)] =
                kbr_item_grad(model, items[start + static_cast<std::size_t>(k)], cfg.loss,
                              cfg.margin, cfg.l2);

        std::vector<int> touched_ent, touched_rel;
        for (const KbrItemGrad& g : grads) {
            total_loss += g.loss;
            for (const auto& [row, vec] : g.entity_rows) {
                double* dst = ent_grad.row(row);
                if (dst[0] == 0.0) {
                    bool zero = true;
                    for (int i = 0; i < d && zero; ++i) zero = dst[i] == 0.0;
                    if (zero) touched_ent.push_back(row);
                }
                for (int i = 0; i < d; ++i) dst[i] += vec[static_cast<std::size_t>(i)];
            }
            for (const auto& [row, vec] : g.relation_rows) {
                double* dst = rel_grad.row(row);
                if (dst[0] == 0.0) {
                    bool zero = true;
                    for (int i = 0; i < d && zero; ++i) zero = dst[i] == 0.0;
                    if (zero) touched_rel.push_back(row);
                }
                for (int i = 0; i < d; ++i) dst[i] += vec[static_cast<std::size_t>(i)];
            }
        }
        std::sort(touched_ent.begin(), touched_ent.end());
        touched_ent.erase(std::unique(touched_ent.begin(), touched_ent.end()),
                          touched_ent.end());
        std::sort(touched_rel.begin(), touched_rel.end());
        touched_rel.erase(std::unique(touched_rel.begin(), touched_rel.end()),
                          touched_rel.end());

        std::vector<std::size_t> idx;
        idx.reserve(touched_ent.size() * static_cast<std::size_t>(d));
        for (int row : touched_ent)
            for (int i = 0; i < d; ++i)
                idx.push_back(static_cast<std::size_t>(row) * static_cast<std::size_t>(d) +
                              static_cast<std::size_t>(i));
        opt_ent.step_sparse({model.entity_emb.data(), model.entity_emb.size()},
                            {ent_grad.data(), ent_grad.size()}, idx);
        idx.clear();
        for (int row : touched_rel)
            for (int i = 0; i < d; ++i)
                idx.push_back(static_cast<std::size_t>(row) * static_cast<std::size_t>(d) +
                              static_cast<std::size_t>(i));
        opt_rel.step_sparse({model.relation_emb.data(), model.relation_emb.size()},
                            {rel_grad.data(), rel_grad.size()}, idx);

        for (int row : touched_ent) {
            double* dst = ent_grad.row(row);
            std::fill(dst, dst + d, 0.0);
        }
        for (int row : touched_rel) {
            double* dst = rel_grad.row(row);
            std::fill(dst, dst + d, 0.0);
        }
    }
    return total_loss;
}

}  // namespace

KbrTrainResult train_kbr(const TripleStore& train, const KbrTrainConfig& cfg,
                         const TripleStore* valid, const KbrModel* resume_from) {
    validate_kbr_config(cfg);
    if (train.facts().empty()) throw ConfigError("kbr training set is empty");

    const int E = train.vocab().num_entities();
    const int R = train.vocab().num_relations();

    KbrModel model;
    model.kind = cfg.kind;
    model.dim = cfg.dim;
    model.num_entities = E;
    model.num_relations = R;
    model.entity_emb = Mat(E, cfg.dim);
    model.relation_emb = Mat(R, cfg.dim);

    Rng rng(cfg.seed);
    if (resume_from) {
        if (resume_from->kind != cfg.kind || resume_from->dim != cfg.dim ||
            resume_from->num_entities != E || resume_from->num_relations != R)
            throw ConfigError("resume model does not match the config and vocabulary");
        model.entity_emb = resume_from->entity_emb;
        model.relation_emb = resume_from->relation_emb;
    } else {
        const double limit = 0.5 / std::sqrt(static_cast<double>(cfg.dim));
        for (std::size_t i = 0; i < model.entity_emb.size(); ++i)
            model.entity_emb.data()[i] = rng.uniform(-limit, limit);
        for (std::size_t i = 0; i < model.relation_emb.size(); ++i)
            model.relation_emb.data()[i] = rng.uniform(-limit, limit);
    }

    Adam opt_ent(model.entity_emb.size(), cfg.learning_rate);
    Adam opt_rel(model.relation_emb.size(), cfg.learning_rate);
    Mat ent_grad(E, cfg.dim, 0.0);
    Mat rel_grad(R, cfg.dim, 0.0);

    std::vector<int> order(train.facts().size());
    std::iota(order.begin(), order.end(), 0);

    KbrTrainResult result;
    result.epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));

    KbrModel best;
    double best_valid = 0.0;
    int since_best = 0;
    const bool early = cfg.patience > 0 && valid && !valid->facts().empty();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::vector<KbrBatchItem> items = draw_epoch_items(
            train, train.facts(), order, cfg.negatives_per_positive, rng, E);
        const double loss =
            epoch_pass(model, items, cfg, opt_ent, opt_rel, ent_grad, rel_grad);
        if (!std::isfinite(loss)) throw TrainingError("non-finite training loss", epoch);
        result.epoch_loss.push_back(loss);

        if (early) {
            Rng vr(derive_seed(cfg.seed, "kbr:valid:" + std::to_string(epoch)));
            std::vector<int> vorder(valid->facts().size());
            std::iota(vorder.begin(), vorder.end(), 0);
            std::vector<KbrBatchItem> vitems = draw_epoch_items(
                train, valid->facts(), vorder, cfg.negatives_per_positive, vr, E);
            double vloss = 0.0;
            for (const KbrBatchItem& it : vitems)
                vloss += kbr_item_loss(model, it, cfg.loss, cfg.margin, cfg.l2);
            if (epoch == 1 || vloss < best_valid) {
                best_valid = vloss;
                best = model;
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                model = best;
                break;
            }
        }
    }
    if (early && best.trained() && since_best > 0) model = best;

    result.model = std::move(model);
    return result;
}

void save_kbr(const KbrModel& m, const std::string& path) {
    if (!m.trained()) throw StateError("refusing to save untrained kbr model");
    BinWriter w;
    w.magic("FFDKB001");
    w.u32(static_cast<std::uint32_t>(m.kind));
    w.u32(static_cast<std::uint32_t>(m.dim));
    w.u32(static_cast<std::uint32_t>(m.num_entities));
    w.u32(static_cast<std::uint32_t>(m.num_relations));
    w.f64s({m.entity_emb.data(), m.entity_emb.size()});
    w.f64s({m.relation_emb.data(), m.relation_emb.size()});
    write_file_atomic(path, w.buffer());
}

KbrModel load_kbr(const std::string& path) {
    BinReader r(read_file(path));
    r.expect_magic("FFDKB001", "kbr model");
    KbrModel m;
    const std::uint32_t kind = r.u32();
    if (kind > 2) throw ParseError("unknown kbr kind tag in " + path);
    m.kind = static_cast<KbrKind>(kind);
    m.dim = static_cast<int>(r.u32());
    m.num_entities = static_cast<int>(r.u32());
    m.num_relations = static_cast<int>(r.u32());
    if (m.dim < 1 || m.num_entities < 1 || m.num_relations < 1)
        throw ParseError("kbr model has invalid dimensions: " + path);
    m.entity_emb = Mat(m.num_entities, m.dim);
    m.relation_emb = Mat(m.num_relations, m.dim);
    r.f64s({m.entity_emb.data(), m.entity_emb.size()});
    r.f64s({m.relation_emb.data(), m.relation_emb.size()});
    if (!r.done()) throw ParseError("trailing bytes in kbr model: " + path);
    return m;
}

}  // namespace ffd
