#include "faae/config_json.hpp"

#include <stdexcept>

namespace faae {

namespace {

[[noreturn]] void type_error(const std::string& context, const char* key, const char* expected) {
    throw std::invalid_argument(context + ": field '" + key + "' must be " + expected);
}

}  // namespace

JsonReader::JsonReader(const nlohmann::json& obj, std::string context)
    : obj_(obj), context_(std::move(context)) {
    if (!obj_.is_object())
        throw std::invalid_argument(context_ + ": expected a JSON object");
}

bool JsonReader::has(const char* key) const { return obj_.contains(key); }

const nlohmann::json& JsonReader::fetch(const char* key) {
    seen_.insert(key);
    return obj_.at(key);
}

double JsonReader::real(const char* key, double fallback) {
    if (!has(key)) {
        seen_.insert(key);
        return fallback;
    }
    const nlohmann::json& v = fetch(key);
    if (!v.is_number()) type_error(context_, key, "a number");
    return v.get<double>();
}

std::uint64_t JsonReader::integer(const char* key, std::uint64_t fallback) {
    if (!has(key)) {
        seen_.insert(key);
        return fallback;
    }
    const nlohmann::json& v = fetch(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        type_error(context_, key, "an integer");
    return v.get<std::uint64_t>();
}

std::size_t JsonReader::count(const char* key, std::size_t fallback) {
    return static_cast<std::size_t>(integer(key, fallback));
}

bool JsonReader::boolean(const char* key, bool fallback) {
    if (!has(key)) {
        seen_.insert(key);
        return fallback;
    }
    const nlohmann::json& v = fetch(key);
    if (!v.is_boolean()) type_error(context_, key, "a boolean");
    return v.get<bool>();
}

std::string JsonReader::text(const char* key, const std::string& fallback) {
    if (!has(key)) {
        seen_.insert(key);
        return fallback;
    }
    const nlohmann::json& v = fetch(key);
    if (!v.is_string()) type_error(context_, key, "a string");
    return v.get<std::string>();
}

std::string JsonReader::require_text(const char* key) {
    if (!has(key))
        throw std::invalid_argument(context_ + ": required field '" + key + "' is missing");
    return text(key, "");
}

std::vector<std::size_t> JsonReader::count_list(const char* key,
                                                std::vector<std::size_t> fallback) {
    if (!has(key)) {
        seen_.insert(key);
        return fallback;
    }
    const nlohmann::json& v = fetch(key);
    if (!v.is_array()) type_error(context_, key, "an array of counts");
    std::vector<std::size_t> out;
    out.reserve(v.size());
    for (const auto& item : v) {
        if (!item.is_number_integer() && !item.is_number_unsigned())
            type_error(context_, key, "an array of counts");
        out.push_back(item.get<std::size_t>());
    }
    return out;
}

std::vector<double> JsonReader::real_list(const char* key, std::vector<double> fallback) {
    if (!has(key)) {
        seen_.insert(key);
        return fallback;
    }
    const nlohmann::json& v = fetch(key);
    if (!v.is_array()) type_error(context_, key, "an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& item : v) {
        if (!item.is_number()) type_error(context_, key, "an array of numbers");
        out.push_back(item.get<double>());
    }
    return out;
}

nlohmann::json JsonReader::child(const char* key) {
    if (!has(key)) {
        seen_.insert(key);
        return nlohmann::json();
    }
    return fetch(key);
}

void JsonReader::finish() const {
    for (const auto& [key, value] : obj_.items()) {
        if (seen_.count(key) == 0)
            throw std::invalid_argument(context_ + ": unknown field '" + key + "'");
    }
}

nlohmann::json model_config_to_json(const ModelConfig& config) {
    nlohmann::json j;
    j["input_dim"] = config.input_dim;
    j["covariate_dim"] = config.covariate_dim;
    j["latent_dim"] = config.latent_dim;
    j["encoder_hidden"] = config.encoder_hidden;
    j["decoder_hidden"] = config.decoder_hidden;
    j["discriminator_hidden"] = config.discriminator_hidden;
    j["alpha"] = config.alpha;
    j["gamma"] = config.gamma;
    j["kl_weight"] = config.kl_weight;
    j["variant"] = to_string(config.variant);
    j["epochs"] = config.epochs;
    j["batch_size"] = config.batch_size;
    j["seed"] = config.seed;
    j["optimizer"] = {{"learning_rate", config.optimizer.learning_rate},
                      {"beta1", config.optimizer.beta1},
                      {"beta2", config.optimizer.beta2},
                      {"epsilon", config.optimizer.epsilon}};
    return j;
}

ModelConfig model_config_from_json(const nlohmann::json& obj, const std::string& context) {
    JsonReader reader(obj, context);
    ModelConfig defaults;
    ModelConfig config;
    config.input_dim = reader.count("input_dim", defaults.input_dim);
    config.covariate_dim = reader.count("covariate_dim", defaults.covariate_dim);
    config.latent_dim = reader.count("latent_dim", defaults.latent_dim);
    config.encoder_hidden = reader.count_list("encoder_hidden", defaults.encoder_hidden);
    config.decoder_hidden = reader.count_list("decoder_hidden", defaults.decoder_hidden);
    config.discriminator_hidden =
        reader.count_list("discriminator_hidden", defaults.discriminator_hidden);
    config.alpha = reader.real("alpha", defaults.alpha);
    config.gamma = reader.real("gamma", defaults.gamma);
    config.kl_weight = reader.real("kl_weight", defaults.kl_weight);
    config.variant = variant_from_string(reader.text("variant", to_string(defaults.variant)));
    config.epochs = reader.count("epochs", defaults.epochs);
    config.batch_size = reader.count("batch_size", defaults.batch_size);
    config.seed = reader.integer("seed", defaults.seed);
    const nlohmann::json opt = reader.child("optimizer");
    if (!opt.is_null()) {
        JsonReader opt_reader(opt, context + ".optimizer");
        config.optimizer.learning_rate =
            opt_reader.real("learning_rate", defaults.optimizer.learning_rate);
        config.optimizer.beta1 = opt_reader.real("beta1", defaults.optimizer.beta1);
        config.optimizer.beta2 = opt_reader.real("beta2", defaults.optimizer.beta2);
        config.optimizer.epsilon = opt_reader.real("epsilon", defaults.optimizer.epsilon);
        opt_reader.finish();
    }
    reader.finish();
    config.validate();
    return config;
}

nlohmann::json synth_config_to_json(const SynthConfig& config) {
    nlohmann::json j;
    j["n_hc"] = config.n_hc;
    j["n_ad"] = config.n_ad;
    j["n_latent_factors"] = config.n_latent_factors;
    j["affected_regions"] = config.affected_regions;
    j["effect_size"] = config.effect_size;
    j["noise_std"] = config.noise_std;
    j["seed"] = config.seed;
    return j;
}

SynthConfig synth_config_from_json(const nlohmann::json& obj, const std::string& context) {
    JsonReader reader(obj, context);
    SynthConfig defaults;
    SynthConfig config;
    config.n_hc = reader.count("n_hc", defaults.n_hc);
    config.n_ad = reader.count("n_ad", defaults.n_ad);
    config.n_latent_factors = reader.count("n_latent_factors", defaults.n_latent_factors);
    config.affected_regions = reader.count_list("affected_regions", defaults.affected_regions);
    config.effect_size = reader.real("effect_size", defaults.effect_size);
    config.noise_std = reader.real("noise_std", defaults.noise_std);
    config.seed = reader.integer("seed", defaults.seed);
    reader.finish();
    config.validate();
    return config;
}

}  // namespace faae
