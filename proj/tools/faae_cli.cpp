// Command-line front end: synth | train | eval | sweep | compare.
// Every run reads one JSON config, writes its artifacts (manifest first)
// into --out, and exits 0 only if every output landed.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "faae/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"faae: adversarial-autoencoder normative modeling"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed_value = 1;
    std::size_t threads = 1;

    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    CLI::Option* seed_opt = app.add_option("--seed", seed_value, "override the config seed");
    app.add_option("--threads", threads, "worker threads for sweep/compare")
        ->capture_default_str();

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic cohort CSV");
    CLI::App* train = app.add_subcommand("train", "train a normative model on controls");
    CLI::App* eval = app.add_subcommand("eval", "score held-out subjects with a checkpoint");
    CLI::App* sweep = app.add_subcommand("sweep", "grid over focal parameters or sample sizes");
    CLI::App* compare = app.add_subcommand("compare", "train and evaluate all six variants");
    for (CLI::App* sub : {synth, train, eval, sweep, compare}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        nlohmann::json config = config_path.empty() ? nlohmann::json::object()
                                                    : faae::load_config_file(config_path);
        if (!config.is_object())
            throw std::invalid_argument("config root must be a JSON object");
        if (seed_opt->count() > 0) config["seed"] = seed_value;

        faae::RunResult result;
        if (synth->parsed())
            result = faae::run_synth(config, out_dir);
        else if (train->parsed())
            result = faae::run_train(config, out_dir);
        else if (eval->parsed())
            result = faae::run_eval(config, out_dir);
        else if (sweep->parsed())
            result = faae::run_sweep(config, out_dir, threads);
        else
            result = faae::run_compare(config, out_dir, threads);

        for (const std::string& name : result.written) {
            const std::filesystem::path path = std::filesystem::path(out_dir) / name;
            std::printf("wrote %s\n", path.string().c_str());
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
