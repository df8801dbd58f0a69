#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace faae {

/// Names (relative to the output directory) of every artifact a command
/// wrote. A command either writes its full declared set or throws.
struct RunResult {
    std::vector<std::string> written;
};

nlohmann::json load_config_file(const std::string& path);

/// The five commands. Each materializes all defaults, writes
/// run_manifest.json first, performs the work, and writes every artifact via
/// a temporary file renamed into place. Unknown config keys are errors.
/// `threads` never influences results, only scheduling.
RunResult run_synth(const nlohmann::json& config, const std::string& out_dir);
RunResult run_train(const nlohmann::json& config, const std::string& out_dir);
RunResult run_eval(const nlohmann::json& config, const std::string& out_dir);
RunResult run_sweep(const nlohmann::json& config, const std::string& out_dir,
                    std::size_t threads = 1);
RunResult run_compare(const nlohmann::json& config, const std::string& out_dir,
                      std::size_t threads = 1);

}  // namespace faae
