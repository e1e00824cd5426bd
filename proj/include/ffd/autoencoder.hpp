#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ffd/kb.hpp"
#include "ffd/util.hpp"

namespace ffd {

// One-hidden-layer denoising auto-encoder over relation profiles, estimating
// log p(relation | entity) for one role. Encoder tanh(W_f y' + b_f), decoder
// sigmoid(W_g x + b_g).
struct AutoencoderParams {
    int d1 = 0;
    int num_relations = 0;
    Mat W_f;                 // d1 x |R|
    std::vector<double> b_f;  // d1
    Mat W_g;                 // |R| x d1
    std::vector<double> b_g;  // |R|

    bool trained() const { return d1 > 0 && num_relations > 0 && !W_f.empty(); }
};

struct AeTrainConfig {
    int d1 = 256;
    double corruption_rate = 0.2;
    int epochs = 1000;
    double learning_rate = 0.005;
    int batch_size = 128;
    std::uint64_t seed = 0;
};

struct AeTrainResult {
    AutoencoderParams params;
    std::vector<double> epoch_loss;
};

// Each 1-bit is independently zeroed with probability rate; a corruption that
// would zero out a nonempty profile gets one uniformly chosen original 1-bit
// restored. 0-bits never change.
std::vector<std::uint8_t> corrupt(const RelationProfile& profile, double rate, Rng& rng);

std::vector<double> encode(const AutoencoderParams& params,
                           std::span<const std::uint8_t> yprime);

std::vector<double> decode(const AutoencoderParams& params, std::span<const double> x);

// Binary cross entropy summed over relations, probabilities clamped to
// [1e-12, 1 - 1e-12] before the logarithm.
double reconstruction_loss(std::span<const std::uint8_t> y, std::span<const double> ytilde);

struct AeGradients {
    Mat W_f;
    std::vector<double> b_f;
    Mat W_g;
    std::vector<double> b_g;
};

// Loss and analytic gradient of a batch (sum over entities); the training
// loop and the gradient checks share these.
double ae_batch_loss(const AutoencoderParams& params,
                     const std::vector<std::vector<std::uint8_t>>& y,
                     const std::vector<std::vector<std::uint8_t>>& yprime);
AeGradients ae_batch_grad(const AutoencoderParams& params,
                          const std::vector<std::vector<std::uint8_t>>& y,
                          const std::vector<std::vector<std::uint8_t>>& yprime,
                          double* loss_out = nullptr);

// Minibatch Adam on the reconstruction loss with fresh corruption each epoch.
// Profiles with no set bits are dropped (they carry no reconstruction signal);
// at least one nonempty profile is required. Pass resume_from to continue
// training from existing parameters with fresh optimizer state.
AeTrainResult train_autoencoder(const std::vector<RelationProfile>& profiles,
                                const AeTrainConfig& cfg,
                                const AutoencoderParams* resume_from = nullptr);

// f_e(r) = log p(r | e): the uncorrupted profile is fed through
// encode/decode and the clamped output logged. An all-zero profile scores
// log(0.5) for every relation.
std::vector<double> predict_relation_scores(const AutoencoderParams& params,
                                            const RelationProfile& profile);

// Profiles of every entity in the store for the given role.
std::vector<RelationProfile> collect_profiles(const TripleStore& store, Role role);

void save_autoencoder(const AutoencoderParams& params, const std::string& path);
AutoencoderParams load_autoencoder(const std::string& path);

}  // namespace ffd
