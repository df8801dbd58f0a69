#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "faae/model.hpp"

namespace faae {

namespace {

// One encoder forward pass plus the mu / log_var split the backward passes
// need. raw_log_var keeps the pre-clamp head outputs so the clamp can mask
// gradients where it saturates.
struct EncodePass {
    ForwardTrace trace;
    GaussianLatent latent;
    Vec raw_log_var;
};

EncodePass encode_traced(const FaaeModel& model, const Vec& x, const Vec& c) {
    EncodePass pass;
    pass.trace = model.encoder.forward_trace(model.encoder_input(x, c));
    const std::size_t L = model.config.latent_dim;
    const Vec& out = pass.trace.output;
    pass.latent.mu.assign(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(L));
    pass.raw_log_var.assign(out.begin() + static_cast<std::ptrdiff_t>(L), out.end());
    pass.latent.log_var.resize(L);
    if (model.config.stochastic_latent()) {
        for (std::size_t j = 0; j < L; ++j)
            pass.latent.log_var[j] =
                std::clamp(pass.raw_log_var[j], -kLogVarClamp, kLogVarClamp);
    } else {
        std::fill(pass.latent.log_var.begin(), pass.latent.log_var.end(), -kLogVarClamp);
    }
    return pass;
}

Vec posterior_with(const FaaeModel& model, const GaussianLatent& latent, const Vec& eps) {
    if (!model.config.stochastic_latent()) return latent.mu;
    return reparameterize_with(latent, eps);
}

void check_batch(const Batch& batch, const NoiseBundle& noise) {
    if (batch.size() == 0) throw std::invalid_argument("training phase on empty batch");
    if (batch.c.size() != batch.size())
        throw std::invalid_argument("batch covariates do not cover the batch");
    if (noise.eps.size() != batch.size() || noise.z_prior.size() != batch.size())
        throw std::invalid_argument("noise bundle does not cover the batch");
}

}  // namespace

std::pair<double, double> recon_kl_phase(const FaaeModel& model, const Batch& batch,
                                         const NoiseBundle& noise, StackGrads& enc_grads,
                                         StackGrads& dec_grads) {
    check_batch(batch, noise);
    enc_grads = model.encoder.zero_grads();
    dec_grads = model.decoder.zero_grads();
    const ModelConfig& cfg = model.config;
    const std::size_t L = cfg.latent_dim;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const double kl_scale = cfg.kl_active() ? cfg.kl_weight : 0.0;
    double recon_sum = 0.0;
    double kl_sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Vec& x = batch.x[i];
        const Vec& c = batch.c[i];
        EncodePass enc = encode_traced(model, x, c);
        const Vec& eps = noise.eps[i];
        const Vec z = posterior_with(model, enc.latent, eps);
        const ForwardTrace dec_trace = model.decoder.forward_trace(model.conditioned_latent(z, c));
        const Vec& x_hat = dec_trace.output;

        recon_sum += reconstruction_loss(x, x_hat);
        if (cfg.kl_active()) kl_sum += kl_term(enc.latent);

        Vec up_dec(x.size());
        const double two_over_d = 2.0 / static_cast<double>(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) up_dec[k] = two_over_d * (x_hat[k] - x[k]);
        StackGrads dg = model.decoder.backward(dec_trace, up_dec);
        accumulate(dec_grads, dg, inv_n);

        Vec dz(dg.input_grad.begin(), dg.input_grad.begin() + static_cast<std::ptrdiff_t>(L));
        Vec up_enc(2 * L, 0.0);
        const bool stochastic = cfg.stochastic_latent();
        for (std::size_t j = 0; j < L; ++j) {
            up_enc[j] = dz[j] + kl_scale * enc.latent.mu[j];
            if (!stochastic) continue;
            const double raw = enc.raw_log_var[j];
            if (raw < -kLogVarClamp || raw > kLogVarClamp) continue;
            const double lv = enc.latent.log_var[j];
            up_enc[L + j] = dz[j] * 0.5 * std::exp(0.5 * lv) * eps[j] +
                            kl_scale * 0.5 * (std::exp(lv) - 1.0);
        }
        StackGrads eg = model.encoder.backward(enc.trace, up_enc);
        accumulate(enc_grads, eg, inv_n);
    }
    return {recon_sum * inv_n, kl_sum * inv_n};
}

double discriminator_phase(const FaaeModel& model, const Batch& batch, const NoiseBundle& noise,
                           StackGrads& disc_grads) {
    check_batch(batch, noise);
    disc_grads = model.discriminator.zero_grads();
    const double alpha = model.config.effective_alpha();
    const double gamma = model.config.effective_gamma();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Vec& c = batch.c[i];

        const ForwardTrace prior_trace =
            model.discriminator.forward_trace(model.conditioned_latent(noise.z_prior[i], c));
        const double p_prior = prior_trace.output[0];
        loss_sum += focal_loss(p_prior, 1, alpha, gamma);
        StackGrads pg = model.discriminator.backward(
            prior_trace, Vec{focal_loss_dp(p_prior, 1, alpha, gamma)});
        accumulate(disc_grads, pg, inv_n);

        // Posterior sample: the encoder is frozen here, so only the value of
        // z matters, not its trace.
        const GaussianLatent latent = model.encode(batch.x[i], c);
        const Vec z_post = posterior_with(model, latent, noise.eps[i]);
        const ForwardTrace post_trace =
            model.discriminator.forward_trace(model.conditioned_latent(z_post, c));
        const double p_post = post_trace.output[0];
        loss_sum += focal_loss(p_post, 0, alpha, gamma);
        StackGrads qg = model.discriminator.backward(
            post_trace, Vec{focal_loss_dp(p_post, 0, alpha, gamma)});
        accumulate(disc_grads, qg, inv_n);
    }
    return loss_sum * inv_n;
}

double generator_phase(const FaaeModel& model, const Batch& batch, const NoiseBundle& noise,
                       StackGrads& enc_grads) {
    check_batch(batch, noise);
    enc_grads = model.encoder.zero_grads();
    const ModelConfig& cfg = model.config;
    const std::size_t L = cfg.latent_dim;
    const double alpha = cfg.effective_alpha();
    const double gamma = cfg.effective_gamma();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Vec& c = batch.c[i];
        const Vec& eps = noise.eps[i];
        EncodePass enc = encode_traced(model, batch.x[i], c);
        const Vec z = posterior_with(model, enc.latent, eps);
        const ForwardTrace disc_trace =
            model.discriminator.forward_trace(model.conditioned_latent(z, c));
        const double p = disc_trace.output[0];
        loss_sum += focal_loss(p, 1, alpha, gamma);

        // Discriminator is frozen: its backward pass only serves to route the
        // gradient to z.
        StackGrads dg = model.discriminator.backward(disc_trace,
                                                     Vec{focal_loss_dp(p, 1, alpha, gamma)});
        Vec up_enc(2 * L, 0.0);
        const bool stochastic = cfg.stochastic_latent();
        for (std::size_t j = 0; j < L; ++j) {
            const double dz = dg.input_grad[j];
            up_enc[j] = dz;
            if (!stochastic) continue;
            const double raw = enc.raw_log_var[j];
            if (raw < -kLogVarClamp || raw > kLogVarClamp) continue;
            up_enc[L + j] = dz * 0.5 * std::exp(0.5 * enc.latent.log_var[j]) * eps[j];
        }
        StackGrads eg = model.encoder.backward(enc.trace, up_enc);
        accumulate(enc_grads, eg, inv_n);
    }
    return loss_sum * inv_n;
}

LossComponents total_loss_gradients(const FaaeModel& model, const Batch& batch,
                                    const NoiseBundle& noise, GroupGrads& grads) {
    check_batch(batch, noise);
    grads.encoder = model.encoder.zero_grads();
    grads.decoder = model.decoder.zero_grads();
    grads.discriminator = model.discriminator.zero_grads();
    const ModelConfig& cfg = model.config;
    const std::size_t L = cfg.latent_dim;
    const double alpha = cfg.effective_alpha();
    const double gamma = cfg.effective_gamma();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const double kl_scale = cfg.kl_active() ? cfg.kl_weight : 0.0;
    LossComponents sums;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Vec& x = batch.x[i];
        const Vec& c = batch.c[i];
        const Vec& eps = noise.eps[i];
        EncodePass enc = encode_traced(model, x, c);
        const Vec z = posterior_with(model, enc.latent, eps);

        const ForwardTrace dec_trace = model.decoder.forward_trace(model.conditioned_latent(z, c));
        const Vec& x_hat = dec_trace.output;
        sums.recon += reconstruction_loss(x, x_hat);
        if (cfg.kl_active()) sums.kl += cfg.kl_weight * kl_term(enc.latent);

        Vec up_dec(x.size());
        const double two_over_d = 2.0 / static_cast<double>(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) up_dec[k] = two_over_d * (x_hat[k] - x[k]);
        StackGrads dg = model.decoder.backward(dec_trace, up_dec);
        accumulate(grads.decoder, dg, inv_n);

        Vec dz(dg.input_grad.begin(), dg.input_grad.begin() + static_cast<std::ptrdiff_t>(L));

        if (cfg.adversarial()) {
            const ForwardTrace prior_trace =
                model.discriminator.forward_trace(model.conditioned_latent(noise.z_prior[i], c));
            const double p_prior = prior_trace.output[0];
            sums.adv += focal_loss(p_prior, 1, alpha, gamma);
            StackGrads pg = model.discriminator.backward(
                prior_trace, Vec{focal_loss_dp(p_prior, 1, alpha, gamma)});
            accumulate(grads.discriminator, pg, inv_n);

            // Same z feeds the decoder and the discriminator, so the focal
            // term's gradient also flows back into the encoder.
            const ForwardTrace post_trace =
                model.discriminator.forward_trace(model.conditioned_latent(z, c));
            const double p_post = post_trace.output[0];
            sums.adv += focal_loss(p_post, 0, alpha, gamma);
            StackGrads qg = model.discriminator.backward(
                post_trace, Vec{focal_loss_dp(p_post, 0, alpha, gamma)});
            accumulate(grads.discriminator, qg, inv_n);
            for (std::size_t j = 0; j < L; ++j) dz[j] += qg.input_grad[j];
        }

        Vec up_enc(2 * L, 0.0);
        const bool stochastic = cfg.stochastic_latent();
        for (std::size_t j = 0; j < L; ++j) {
            up_enc[j] = dz[j] + kl_scale * enc.latent.mu[j];
            if (!stochastic) continue;
            const double raw = enc.raw_log_var[j];
            if (raw < -kLogVarClamp || raw > kLogVarClamp) continue;
            const double lv = enc.latent.log_var[j];
            up_enc[L + j] = dz[j] * 0.5 * std::exp(0.5 * lv) * eps[j] +
                            kl_scale * 0.5 * (std::exp(lv) - 1.0);
        }
        StackGrads eg = model.encoder.backward(enc.trace, up_enc);
        accumulate(grads.encoder, eg, inv_n);
    }
    return {sums.recon * inv_n, sums.kl * inv_n, sums.adv * inv_n};
}

namespace {

void apply_update(FeedForward& net, AdamState& opt, const StackGrads& grads) {
    Vec params = net.param_vector();
    adam_step(params, FeedForward::flatten_grads(grads), opt);
    net.set_param_vector(params);
}

void require_finite(double value, const char* component, std::size_t epoch, std::size_t batch) {
    if (std::isfinite(value)) return;
    throw std::runtime_error("non-finite " + std::string(component) + " loss at epoch " +
                             std::to_string(epoch) + ", batch " + std::to_string(batch) +
                             "; training aborted");
}

}  // namespace

TrainResult train(FaaeModel& model, const std::vector<TrainSample>& train_set, RngStream& rng,
                  const TrainHooks& hooks) {
    if (train_set.empty()) throw std::invalid_argument("training set is empty");
    for (const TrainSample& s : train_set)
        if (!s.is_control) throw std::invalid_argument("normative model must train on HC only");

    const ModelConfig& cfg = model.config;
    const std::size_t n = train_set.size();
    const bool run_adversarial = cfg.adversarial() && !hooks.disable_adversarial;

    TrainResult result;
    result.trace.reserve(cfg.epochs);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates reshuffle each epoch.
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = rng.uniform_below(i + 1);
            std::swap(order[i], order[j]);
        }

        EpochTrace trace;
        StackGrads enc_grads, dec_grads, disc_grads;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            Batch batch;
            batch.x.reserve(stop - start);
            batch.c.reserve(stop - start);
            for (std::size_t k = start; k < stop; ++k) {
                batch.x.push_back(train_set[order[k]].features);
                batch.c.push_back(train_set[order[k]].covariates);
            }
            const NoiseBundle noise = hooks.zero_noise
                ? zero_noise(cfg, batch.size())
                : draw_noise(cfg, batch.size(), rng);
            const double weight = static_cast<double>(batch.size()) / static_cast<double>(n);

            const auto [recon, kl] = recon_kl_phase(model, batch, noise, enc_grads, dec_grads);
            require_finite(recon + kl, "reconstruction", epoch, batch_index);
            apply_update(model.encoder, model.encoder_opt, enc_grads);
            apply_update(model.decoder, model.decoder_opt, dec_grads);
            trace.recon += weight * recon;
            trace.kl += weight * kl;

            if (run_adversarial) {
                const double adv = discriminator_phase(model, batch, noise, disc_grads);
                require_finite(adv, "discriminator", epoch, batch_index);
                apply_update(model.discriminator, model.discriminator_opt, disc_grads);
                trace.adv += weight * adv;

                const double gen = generator_phase(model, batch, noise, enc_grads);
                require_finite(gen, "generator", epoch, batch_index);
                apply_update(model.encoder, model.encoder_opt, enc_grads);
                trace.gen += weight * gen;
            }
        }
        result.trace.push_back(trace);
    }
    return result;
}

}  // namespace faae
