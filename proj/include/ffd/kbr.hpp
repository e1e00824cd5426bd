#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ffd/kb.hpp"
#include "ffd/util.hpp"

namespace ffd {

enum class KbrKind { distmult, complex_, analogy };

KbrKind parse_kbr_kind(std::string_view name);
std::string kbr_kind_name(KbrKind kind);

// Bilinear KB embedding model. For ComplEx, entity and relation rows hold
// d/2 complex numbers as interleaved (re, im) pairs; for Analogy, relation
// rows hold the (a, b) parameters of d/2 two-by-two blocks [a, b; -b, a].
struct KbrModel {
    KbrKind kind = KbrKind::distmult;
    int dim = 0;
    int num_entities = 0;
    int num_relations = 0;
    Mat entity_emb;    // |E| x dim
    Mat relation_emb;  // |R| x dim

    bool trained() const { return dim > 0 && num_entities > 0 && !entity_emb.empty(); }
};

enum class KbrLoss { margin, logistic };

KbrLoss parse_kbr_loss(std::string_view name);
std::string kbr_loss_name(KbrLoss loss);

KbrLoss default_kbr_loss(KbrKind kind);

struct KbrTrainConfig {
    KbrKind kind = KbrKind::analogy;
    int dim = 200;
    int epochs = 100;
    double learning_rate = 0.01;
    int batch_size = 512;
    int negatives_per_positive = 10;
    KbrLoss loss = KbrLoss::logistic;
    double margin = 1.0;
    double l2 = 0.0;
    std::uint64_t seed = 0;
    // early stopping on validation loss; 0 disables it
    int patience = 0;
};

struct KbrTrainResult {
    KbrModel model;
    std::vector<double> epoch_loss;
};

double score(const KbrModel& model, int h, int r, int t);

// c(h,r) with score(h,r,t) = dot(c, entity_emb[t]); the hot path behind
// scoring a head-relation pair against every tail.
void tail_combo(const KbrModel& model, int h, int r, std::span<double> out);
void score_all_tails(const KbrModel& model, int h, int r, std::span<double> out);

// Minibatch Adam over margin or logistic loss with uniform head-or-tail
// corruption negatives, rejecting corruptions that are known training facts.
// Pass resume_from to continue from existing embeddings with fresh optimizer
// state; its shape must match the config and the training vocabulary.
KbrTrainResult train_kbr(const TripleStore& train, const KbrTrainConfig& cfg,
                         const TripleStore* valid = nullptr,
                         const KbrModel* resume_from = nullptr);

// f_{h,r}(t) = f_r(h,t) - logsumexp over all tails, max-shift stabilized.
std::vector<double> tail_log_softmax(const KbrModel& model, int h, int r);

// log p(r,t | h) over the full |R| x |E| grid.
Mat joint_log_softmax(const KbrModel& model, int h);

// One training item: a positive with its drawn negatives. Loss and gradient
// are shared between the trainer and the finite-difference checks. Gradients
// come back as per-row accumulations.
struct KbrBatchItem {
    Triple pos;
    std::vector<Triple> negs;
};

struct KbrItemGrad {
    std::vector<std::pair<int, std::vector<double>>> entity_rows;
    std::vector<std::pair<int, std::vector<double>>> relation_rows;
    double loss = 0.0;
};

double kbr_item_loss(const KbrModel& model, const KbrBatchItem& item, KbrLoss loss,
                     double margin, double l2 = 0.0);
KbrItemGrad kbr_item_grad(const KbrModel& model, const KbrBatchItem& item, KbrLoss loss,
                          double margin, double l2 = 0.0);

void save_kbr(const KbrModel& model, const std::string& path);
KbrModel load_kbr(const std::string& path);

}  // namespace ffd
