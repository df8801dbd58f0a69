#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "faae/adam.hpp"
#include "faae/layers.hpp"
#include "faae/rng.hpp"

namespace faae {

/// The model family. Each variant is a configuration of the same
/// encoder/decoder/discriminator machinery:
///
///   variant | covariates | stochastic latent + KL | adversarial | focal params
///   --------+------------+------------------------+-------------+-------------
///   AE      | no         | no (z = mu, KL off)    | no          | -
///   VAE     | no         | yes                    | no          | -
///   CVAE    | yes        | yes                    | no          | -
///   AAE     | no         | yes                    | yes         | fixed a=0.5, g=0
///   ACVAE   | yes        | yes                    | yes         | fixed a=0.5, g=0
///   FAAE    | yes        | yes                    | yes         | from config
enum class Variant { AE, VAE, CVAE, AAE, ACVAE, FAAE };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct ModelConfig {
    std::size_t input_dim = 100;
    std::size_t covariate_dim = 22;
    std::size_t latent_dim = 16;
    std::vector<std::size_t> encoder_hidden = {64, 32};
    std::vector<std::size_t> decoder_hidden = {32, 64};
    std::vector<std::size_t> discriminator_hidden = {32, 16};
    double alpha = 0.2;
    double gamma = 15.0;
    // Reconstruction error is a per-coordinate mean, so the KL weight that
    // reproduces the unscaled (summed-likelihood) variational objective is
    // 1 / input_dim. A weight of 1.0 against a 100-feature mean overweights
    // the KL term 100-fold and collapses the posterior onto the prior.
    double kl_weight = 0.01;
    Variant variant = Variant::FAAE;
    std::size_t epochs = 500;
    std::size_t batch_size = 64;
    std::uint64_t seed = 1;
    AdamConfig optimizer;

    bool uses_covariates() const {
        return variant == Variant::CVAE || variant == Variant::ACVAE || variant == Variant::FAAE;
    }
    bool stochastic_latent() const { return variant != Variant::AE; }
    bool kl_active() const { return variant != Variant::AE; }
    bool adversarial() const {
        return variant == Variant::AAE || variant == Variant::ACVAE || variant == Variant::FAAE;
    }
    /// AAE/ACVAE run the plain adversarial objective; only FAAE exposes the
    /// focal parameters.
    double effective_alpha() const { return variant == Variant::FAAE ? alpha : 0.5; }
    double effective_gamma() const { return variant == Variant::FAAE ? gamma : 0.0; }

    std::size_t encoder_input_dim() const {
        return input_dim + (uses_covariates() ? covariate_dim : 0);
    }
    std::size_t decoder_input_dim() const {
        return latent_dim + (uses_covariates() ? covariate_dim : 0);
    }
    std::size_t discriminator_input_dim() const { return decoder_input_dim(); }

    void validate() const;  // throws std::invalid_argument on a bad field
};

/// Posterior parameters for one sample. log_var is stored already clamped to
/// [-10, 10] so exp() stays tame under adversarial pressure.
struct GaussianLatent {
    Vec mu;
    Vec log_var;
};

constexpr double kLogVarClamp = 10.0;
constexpr double kProbClamp = 1e-7;

struct FaaeModel {
    ModelConfig config;
    FeedForward encoder;        // enc_in -> 2 * latent_dim (mu || log_var)
    FeedForward decoder;        // dec_in -> input_dim, identity head
    FeedForward discriminator;  // latent(+cov) -> 1, sigmoid head
    AdamState encoder_opt;
    AdamState decoder_opt;
    AdamState discriminator_opt;

    GaussianLatent encode(const Vec& x, const Vec& c) const;
    Vec decode(const Vec& z, const Vec& c) const;
    double discriminate(const Vec& z, const Vec& c) const;

    /// Latent used downstream of encode: a reparameterized sample, or mu
    /// exactly for the deterministic AE variant.
    Vec posterior_sample(const GaussianLatent& latent, RngStream& rng) const;

    /// Model input for the encoder / decoder / discriminator, respecting
    /// whether the variant conditions on covariates.
    Vec encoder_input(const Vec& x, const Vec& c) const;
    Vec conditioned_latent(const Vec& z, const Vec& c) const;
};

/// Fresh model with Glorot-initialized stacks, seeded from config.seed.
FaaeModel make_model(const ModelConfig& config);

/// z = mu + exp(log_var / 2) . eps with a fresh standard-normal eps.
Vec reparameterize(const GaussianLatent& latent, RngStream& rng);
/// Same map with the noise supplied by the caller (test hook, pinned-noise
/// gradient checks).
Vec reparameterize_with(const GaussianLatent& latent, const Vec& eps);

/// KL(N(mu, diag(exp(log_var))) || N(0, I)), closed form, always >= 0.
double kl_term(const GaussianLatent& latent);

/// Mean squared error over coordinates.
double reconstruction_loss(const Vec& x, const Vec& x_hat);

/// Focal loss for one predicted probability. p is clamped to
/// [1e-7, 1 - 1e-7] before the logarithm.
double focal_loss(double p, int label, double alpha, double gamma);
/// d focal_loss / d p (zero where p sits outside the clamp range).
double focal_loss_dp(double p, int label, double alpha, double gamma);

struct Batch {
    std::vector<Vec> x;
    std::vector<Vec> c;
    std::size_t size() const { return x.size(); }
};

/// Pinned noise for one batch: one posterior draw and one prior draw per
/// sample. Used anywhere a loss must be a deterministic function of the
/// parameters (gradient checks) and by the training phases.
struct NoiseBundle {
    std::vector<Vec> eps;      // posterior noise, latent_dim each
    std::vector<Vec> z_prior;  // prior draws, latent_dim each
};

NoiseBundle draw_noise(const ModelConfig& config, std::size_t batch_size, RngStream& rng);
NoiseBundle zero_noise(const ModelConfig& config, std::size_t batch_size);

struct LossComponents {
    double recon = 0.0;
    double kl = 0.0;
    double adv = 0.0;  // focal adversarial (discriminator) loss; 0 when inactive
    double total() const { return recon + kl + adv; }
};

/// cvae objective in minimization form: recon + kl_weight * KL.
double cvae_loss(const FaaeModel& model, const Vec& x, const Vec& c, RngStream& rng);

/// Focal adversarial loss of the discriminator over one batch with pinned
/// prior and posterior draws (the minimization form of the adversarial
/// objective, focal-weighted): mean over samples of
/// FL(D(z_prior|c), y=1) + FL(D(q|c), y=0).
double adv_focal_loss(const FaaeModel& model, const Batch& batch, const NoiseBundle& noise);
/// Single-sample convenience form; the posterior draw comes from rng.
double adv_focal_loss(const FaaeModel& model, const Vec& x, const Vec& c, const Vec& z_prior,
                      RngStream& rng);

/// All components on one batch, noise drawn from rng. Components inactive
/// for the variant are exactly zero; kl is reported with kl_weight applied so
/// total() is the objective the variant minimizes.
LossComponents total_loss(const FaaeModel& model, const Batch& batch, RngStream& rng);
LossComponents total_loss_pinned(const FaaeModel& model, const Batch& batch,
                                 const NoiseBundle& noise);

struct GroupGrads {
    StackGrads encoder;
    StackGrads decoder;
    StackGrads discriminator;
};

/// Training phase (a): reconstruction + kl_weight * KL, gradients for
/// encoder and decoder. Returns (recon, kl) averaged over the batch.
std::pair<double, double> recon_kl_phase(const FaaeModel& model, const Batch& batch,
                                         const NoiseBundle& noise, StackGrads& enc_grads,
                                         StackGrads& dec_grads);

/// Training phase (b): discriminator update on the focal adversarial loss,
/// encoder frozen. Returns the batch-mean loss.
double discriminator_phase(const FaaeModel& model, const Batch& batch, const NoiseBundle& noise,
                           StackGrads& disc_grads);

/// Training phase (c): encoder update on the non-saturating focal generator
/// loss -alpha (1 - D(q))^gamma log D(q), discriminator frozen.
double generator_phase(const FaaeModel& model, const Batch& batch, const NoiseBundle& noise,
                       StackGrads& enc_grads);

/// Value and full true gradient of recon + kl_weight*KL + adv_focal on one
/// batch with pinned noise, including the adversarial path through the
/// encoder. This is the object the finite-difference checks differentiate.
LossComponents total_loss_gradients(const FaaeModel& model, const Batch& batch,
                                    const NoiseBundle& noise, GroupGrads& grads);

struct EpochTrace {
    double recon = 0.0;
    double kl = 0.0;
    double adv = 0.0;
    double gen = 0.0;
    double total() const { return recon + kl + adv + gen; }
};

struct TrainHooks {
    bool zero_noise = false;           // use eps = 0 and skip the draws
    bool disable_adversarial = false;  // skip phases (b)/(c) regardless of variant
};

struct TrainResult {
    std::vector<EpochTrace> trace;  // one entry per epoch
};

/// Labeled sample view used by train(); kept minimal so the data module owns
/// the full Sample type.
struct TrainSample {
    Vec features;
    Vec covariates;
    bool is_control = true;
};

/// Alternating minibatch training on healthy controls only. Throws if any
/// sample is not a control, and aborts with a diagnostic on non-finite loss.
TrainResult train(FaaeModel& model, const std::vector<TrainSample>& train_set, RngStream& rng,
                  const TrainHooks& hooks = {});

}  // namespace faae
