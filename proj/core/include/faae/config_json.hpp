#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "faae/data.hpp"
#include "faae/model.hpp"

namespace faae {

/// Strict reader over one JSON object: every field access marks its key, and
/// finish() rejects any key never asked for, so config typos fail loudly
/// instead of silently falling back to defaults.
class JsonReader {
public:
    JsonReader(const nlohmann::json& obj, std::string context);

    bool has(const char* key) const;
    double real(const char* key, double fallback);
    std::uint64_t integer(const char* key, std::uint64_t fallback);
    std::size_t count(const char* key, std::size_t fallback);
    bool boolean(const char* key, bool fallback);
    std::string text(const char* key, const std::string& fallback);
    std::string require_text(const char* key);
    std::vector<std::size_t> count_list(const char* key, std::vector<std::size_t> fallback);
    std::vector<double> real_list(const char* key, std::vector<double> fallback);

    /// Marks the key and returns the raw value (null when absent) for nested
    /// objects handled by their own reader.
    nlohmann::json child(const char* key);

    void finish() const;

private:
    const nlohmann::json& fetch(const char* key);

    const nlohmann::json& obj_;
    std::string context_;
    std::set<std::string> seen_;
};

nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& obj, const std::string& context);

nlohmann::json synth_config_to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const nlohmann::json& obj, const std::string& context);

}  // namespace faae
