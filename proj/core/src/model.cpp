#include "faae/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace faae {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::AE: return "AE";
        case Variant::VAE: return "VAE";
        case Variant::CVAE: return "CVAE";
        case Variant::AAE: return "AAE";
        case Variant::ACVAE: return "ACVAE";
        case Variant::FAAE: return "FAAE";
    }
    throw std::logic_error("unhandled variant");
}

Variant variant_from_string(const std::string& name) {
    if (name == "AE") return Variant::AE;
    if (name == "VAE") return Variant::VAE;
    if (name == "CVAE") return Variant::CVAE;
    if (name == "AAE") return Variant::AAE;
    if (name == "ACVAE") return Variant::ACVAE;
    if (name == "FAAE") return Variant::FAAE;
    throw std::invalid_argument("unknown model variant '" + name +
                                "' (expected AE, VAE, CVAE, AAE, ACVAE, or FAAE)");
}

void ModelConfig::validate() const {
    if (input_dim == 0) throw std::invalid_argument("input_dim must be >= 1");
    if (latent_dim == 0) throw std::invalid_argument("latent_dim must be >= 1");
    for (std::size_t h : encoder_hidden)
        if (h == 0) throw std::invalid_argument("encoder_hidden sizes must be >= 1");
    for (std::size_t h : decoder_hidden)
        if (h == 0) throw std::invalid_argument("decoder_hidden sizes must be >= 1");
    for (std::size_t h : discriminator_hidden)
        if (h == 0) throw std::invalid_argument("discriminator_hidden sizes must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie strictly inside (0, 1)");
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
    if (!(kl_weight >= 0.0)) throw std::invalid_argument("kl_weight must be >= 0");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
}

namespace {

Vec concat(const Vec& a, const Vec& b) {
    Vec out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

void check_length(const Vec& v, std::size_t expected, const char* what) {
    if (v.size() != expected)
        throw std::invalid_argument(std::string(what) + " has length " +
                                    std::to_string(v.size()) + ", expected " +
                                    std::to_string(expected));
}

}  // namespace

Vec FaaeModel::encoder_input(const Vec& x, const Vec& c) const {
    check_length(x, config.input_dim, "feature vector");
    if (!config.uses_covariates()) return x;
    check_length(c, config.covariate_dim, "covariate vector");
    return concat(x, c);
}

Vec FaaeModel::conditioned_latent(const Vec& z, const Vec& c) const {
    check_length(z, config.latent_dim, "latent vector");
    if (!config.uses_covariates()) return z;
    check_length(c, config.covariate_dim, "covariate vector");
    return concat(z, c);
}

GaussianLatent FaaeModel::encode(const Vec& x, const Vec& c) const {
    const Vec out = encoder.forward(encoder_input(x, c));
    const std::size_t L = config.latent_dim;
    GaussianLatent latent;
    latent.mu.assign(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(L));
    latent.log_var.resize(L);
    if (config.stochastic_latent()) {
        for (std::size_t j = 0; j < L; ++j)
            latent.log_var[j] = std::clamp(out[L + j], -kLogVarClamp, kLogVarClamp);
    } else {
        // Deterministic variant: the latent is exactly mu. Report the
        // smallest representable spread under the clamp so sigma ~ 0.
        std::fill(latent.log_var.begin(), latent.log_var.end(), -kLogVarClamp);
    }
    return latent;
}

Vec FaaeModel::decode(const Vec& z, const Vec& c) const {
    return decoder.forward(conditioned_latent(z, c));
}

double FaaeModel::discriminate(const Vec& z, const Vec& c) const {
    return discriminator.forward(conditioned_latent(z, c))[0];
}

Vec FaaeModel::posterior_sample(const GaussianLatent& latent, RngStream& rng) const {
    if (!config.stochastic_latent()) return latent.mu;
    return reparameterize(latent, rng);
}

FaaeModel make_model(const ModelConfig& config) {
    config.validate();
    FaaeModel model;
    model.config = config;
    model.encoder = FeedForward::make(config.encoder_input_dim(), config.encoder_hidden,
                                      2 * config.latent_dim, Activation::Tanh,
                                      Activation::Identity);
    model.decoder = FeedForward::make(config.decoder_input_dim(), config.decoder_hidden,
                                      config.input_dim, Activation::Tanh, Activation::Identity);
    model.discriminator = FeedForward::make(config.discriminator_input_dim(),
                                            config.discriminator_hidden, 1, Activation::Tanh,
                                            Activation::Sigmoid);
    RngStream init_rng(config.seed);
    init_glorot(model.encoder, init_rng);
    init_glorot(model.decoder, init_rng);
    init_glorot(model.discriminator, init_rng);
    model.encoder_opt = AdamState(model.encoder.param_count(), config.optimizer);
    model.decoder_opt = AdamState(model.decoder.param_count(), config.optimizer);
    model.discriminator_opt = AdamState(model.discriminator.param_count(), config.optimizer);
    return model;
}

Vec reparameterize(const GaussianLatent& latent, RngStream& rng) {
    return reparameterize_with(latent, sample_standard_normal(rng, latent.mu.size()));
}

Vec reparameterize_with(const GaussianLatent& latent, const Vec& eps) {
    if (latent.mu.size() != latent.log_var.size())
        throw std::invalid_argument("latent mu and log_var lengths differ");
    check_length(eps, latent.mu.size(), "noise vector");
    Vec z(latent.mu.size());
    for (std::size_t j = 0; j < z.size(); ++j)
        z[j] = latent.mu[j] + std::exp(0.5 * latent.log_var[j]) * eps[j];
    return z;
}

double kl_term(const GaussianLatent& latent) {
    if (latent.mu.size() != latent.log_var.size())
        throw std::invalid_argument("latent mu and log_var lengths differ");
    double sum = 0.0;
    for (std::size_t j = 0; j < latent.mu.size(); ++j) {
        const double lv = latent.log_var[j];
        sum += latent.mu[j] * latent.mu[j] + std::exp(lv) - 1.0 - lv;
    }
    return 0.5 * sum;
}

double reconstruction_loss(const Vec& x, const Vec& x_hat) {
    check_length(x_hat, x.size(), "reconstruction");
    if (x.empty()) throw std::invalid_argument("reconstruction_loss on empty vectors");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = x[i] - x_hat[i];
        sum += r * r;
    }
    return sum / static_cast<double>(x.size());
}

double focal_loss(double p, int label, double alpha, double gamma) {
    if (label != 0 && label != 1)
        throw std::invalid_argument("focal_loss label must be 0 or 1");
    p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    if (label == 1) return -alpha * std::pow(1.0 - p, gamma) * std::log(p);
    return -(1.0 - alpha) * std::pow(p, gamma) * std::log(1.0 - p);
}

double focal_loss_dp(double p, int label, double alpha, double gamma) {
    if (label != 0 && label != 1)
        throw std::invalid_argument("focal_loss label must be 0 or 1");
    // Outside the clamp range the loss is flat in p.
    if (p < kProbClamp || p > 1.0 - kProbClamp) return 0.0;
    if (label == 1) {
        const double modulating = (gamma > 0.0)
            ? alpha * gamma * std::pow(1.0 - p, gamma - 1.0) * std::log(p)
            : 0.0;
        return modulating - alpha * std::pow(1.0 - p, gamma) / p;
    }
    const double modulating = (gamma > 0.0)
        ? -(1.0 - alpha) * gamma * std::pow(p, gamma - 1.0) * std::log(1.0 - p)
        : 0.0;
    return modulating + (1.0 - alpha) * std::pow(p, gamma) / (1.0 - p);
}

NoiseBundle draw_noise(const ModelConfig& config, std::size_t batch_size, RngStream& rng) {
    NoiseBundle noise;
    noise.eps.reserve(batch_size);
    noise.z_prior.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i)
        noise.eps.push_back(sample_standard_normal(rng, config.latent_dim));
    for (std::size_t i = 0; i < batch_size; ++i)
        noise.z_prior.push_back(sample_standard_normal(rng, config.latent_dim));
    return noise;
}

NoiseBundle zero_noise(const ModelConfig& config, std::size_t batch_size) {
    NoiseBundle noise;
    noise.eps.assign(batch_size, Vec(config.latent_dim, 0.0));
    noise.z_prior.assign(batch_size, Vec(config.latent_dim, 0.0));
    return noise;
}

namespace {

Vec posterior_with(const FaaeModel& model, const GaussianLatent& latent, const Vec& eps) {
    if (!model.config.stochastic_latent()) return latent.mu;
    return reparameterize_with(latent, eps);
}

}  // namespace

double cvae_loss(const FaaeModel& model, const Vec& x, const Vec& c, RngStream& rng) {
    const GaussianLatent latent = model.encode(x, c);
    const Vec z = model.posterior_sample(latent, rng);
    const double recon = reconstruction_loss(x, model.decode(z, c));
    if (!model.config.kl_active()) return recon;
    return recon + model.config.kl_weight * kl_term(latent);
}

double adv_focal_loss(const FaaeModel& model, const Batch& batch, const NoiseBundle& noise) {
    if (batch.size() == 0) throw std::invalid_argument("adv_focal_loss on empty batch");
    if (noise.eps.size() != batch.size() || noise.z_prior.size() != batch.size())
        throw std::invalid_argument("noise bundle does not cover the batch");
    const double alpha = model.config.effective_alpha();
    const double gamma = model.config.effective_gamma();
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Vec& c = batch.c[i];
        const double p_prior = model.discriminate(noise.z_prior[i], c);
        const GaussianLatent latent = model.encode(batch.x[i], c);
        const Vec z_post = posterior_with(model, latent, noise.eps[i]);
        const double p_post = model.discriminate(z_post, c);
        sum += focal_loss(p_prior, 1, alpha, gamma) + focal_loss(p_post, 0, alpha, gamma);
    }
    return sum / static_cast<double>(batch.size());
}

double adv_focal_loss(const FaaeModel& model, const Vec& x, const Vec& c, const Vec& z_prior,
                      RngStream& rng) {
    Batch batch;
    batch.x = {x};
    batch.c = {c};
    NoiseBundle noise;
    noise.eps = {sample_standard_normal(rng, model.config.latent_dim)};
    noise.z_prior = {z_prior};
    return adv_focal_loss(model, batch, noise);
}

LossComponents total_loss_pinned(const FaaeModel& model, const Batch& batch,
                                 const NoiseBundle& noise) {
    if (batch.size() == 0) throw std::invalid_argument("total_loss on empty batch");
    if (noise.eps.size() != batch.size() || noise.z_prior.size() != batch.size())
        throw std::invalid_argument("noise bundle does not cover the batch");
    const ModelConfig& cfg = model.config;
    const double alpha = cfg.effective_alpha();
    const double gamma = cfg.effective_gamma();
    LossComponents sums;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Vec& x = batch.x[i];
        const Vec& c = batch.c[i];
        const GaussianLatent latent = model.encode(x, c);
        const Vec z = posterior_with(model, latent, noise.eps[i]);
        sums.recon += reconstruction_loss(x, model.decode(z, c));
        if (cfg.kl_active()) sums.kl += cfg.kl_weight * kl_term(latent);
        if (cfg.adversarial()) {
            const double p_prior = model.discriminate(noise.z_prior[i], c);
            const double p_post = model.discriminate(z, c);
            sums.adv += focal_loss(p_prior, 1, alpha, gamma) +
                        focal_loss(p_post, 0, alpha, gamma);
        }
    }
    const double n = static_cast<double>(batch.size());
    return {sums.recon / n, sums.kl / n, sums.adv / n};
}

LossComponents total_loss(const FaaeModel& model, const Batch& batch, RngStream& rng) {
    return total_loss_pinned(model, batch, draw_noise(model.config, batch.size(), rng));
}

}  // namespace faae
