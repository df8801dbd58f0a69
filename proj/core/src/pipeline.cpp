#include "faae/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <stdexcept>

#include "faae/checkpoint.hpp"
#include "faae/config_json.hpp"
#include "faae/data.hpp"
#include "faae/eval.hpp"
#include "faae/format.hpp"
#include "faae/parallel.hpp"

namespace faae {

namespace {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& dir, const std::string& name,
                       const std::string& content) {
    const fs::path tmp = dir / (name + ".tmp");
    {
        std::ofstream file(tmp, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write file: " + tmp.string());
        file.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!file) throw std::runtime_error("failed while writing file: " + tmp.string());
    }
    fs::rename(tmp, dir / name);
}

fs::path prepare_out_dir(const std::string& out_dir) {
    const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    fs::create_directories(dir);
    return dir;
}

/// Configs carry an optional "command" tag (manifests always do) so a
/// manifest cannot silently be replayed under the wrong subcommand.
void check_command_tag(JsonReader& reader, const char* command) {
    const std::string tag = reader.text("command", command);
    if (tag != command)
        throw std::invalid_argument("config is for command '" + tag + "', not '" +
                                    std::string(command) + "'");
}

void write_manifest(const fs::path& dir, const nlohmann::json& manifest, RunResult& result) {
    write_file_atomic(dir, "run_manifest.json", manifest.dump(2) + "\n");
    result.written.push_back("run_manifest.json");
}

nlohmann::json object_or_empty(const nlohmann::json& value, const char* what) {
    if (value.is_null()) return nlohmann::json::object();
    if (!value.is_object())
        throw std::invalid_argument(std::string(what) + " must be a JSON object");
    return value;
}

/// Model sub-config with the run seed materialized as its default
/// initialization seed.
ModelConfig resolve_model_config(nlohmann::json model_obj, std::uint64_t seed,
                                 const std::string& context) {
    if (!model_obj.contains("seed")) model_obj["seed"] = seed;
    return model_config_from_json(model_obj, context);
}

std::string join_lines(const std::vector<std::string>& items) {
    std::string out;
    for (const std::string& item : items) {
        out += item;
        out.push_back('\n');
    }
    return out;
}

void append_metric_columns(std::string& row, const EvalSummary& summary) {
    append_real(row, summary.auroc.mean);
    row.push_back(',');
    append_real(row, summary.auroc.std_dev);
    row.push_back(',');
    append_real(row, summary.sensitivity.mean);
    row.push_back(',');
    append_real(row, summary.sensitivity.std_dev);
    row.push_back(',');
    append_real(row, summary.specificity.mean);
    row.push_back(',');
    append_real(row, summary.specificity.std_dev);
}

nlohmann::json metric_to_json(const MetricSummary& metric) {
    return {{"mean", metric.mean}, {"std", metric.std_dev}};
}

}  // namespace

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("cannot open config file: " + path);
    try {
        return nlohmann::json::parse(file);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config file " + path + " is not valid JSON: " + e.what());
    }
}

RunResult run_synth(const nlohmann::json& config, const std::string& out_dir) {
    JsonReader reader(config, "synth config");
    check_command_tag(reader, "synth");
    const std::uint64_t seed = reader.integer("seed", 1);
    nlohmann::json synth_obj = object_or_empty(reader.child("synth"), "field 'synth'");
    if (!synth_obj.contains("seed")) synth_obj["seed"] = seed;
    const SynthConfig synth = synth_config_from_json(synth_obj, "synth config.synth");
    reader.finish();

    nlohmann::json manifest;
    manifest["command"] = "synth";
    manifest["seed"] = seed;
    manifest["synth"] = synth_config_to_json(synth);

    const fs::path dir = prepare_out_dir(out_dir);
    RunResult result;
    write_manifest(dir, manifest, result);

    const Dataset dataset = generate_synthetic(synth);
    const fs::path csv_tmp = dir / "dataset.csv.tmp";
    save_csv(csv_tmp.string(), dataset);
    fs::rename(csv_tmp, dir / "dataset.csv");
    result.written.push_back("dataset.csv");

    nlohmann::json meta = synth_config_to_json(synth);
    meta["age_bin_edges"] = age_bin_edges();
    write_file_atomic(dir, "dataset_meta.json", meta.dump(2) + "\n");
    result.written.push_back("dataset_meta.json");
    return result;
}

RunResult run_train(const nlohmann::json& config, const std::string& out_dir) {
    JsonReader reader(config, "train config");
    check_command_tag(reader, "train");
    const std::string dataset_path = reader.require_text("dataset");
    const std::uint64_t seed = reader.integer("seed", 1);
    const double fraction = reader.real("split_fraction", 0.8);
    const ModelConfig model_config =
        resolve_model_config(object_or_empty(reader.child("model"), "field 'model'"), seed,
                             "train config.model");
    reader.finish();

    nlohmann::json manifest;
    manifest["command"] = "train";
    manifest["dataset"] = dataset_path;
    manifest["seed"] = seed;
    manifest["split_fraction"] = fraction;
    manifest["model"] = model_config_to_json(model_config);

    const fs::path dir = prepare_out_dir(out_dir);
    RunResult result;
    write_manifest(dir, manifest, result);

    const Dataset dataset = load_csv(dataset_path);
    const RngStream base(seed);
    RngStream split_rng = base.derive(kSplitStreamIndex);
    const SplitIndices indices = split(dataset, fraction, split_rng);

    std::vector<Sample> train_set = gather(dataset, indices.train);
    const CovariateEncoder encoder = CovariateEncoder::fit(train_set);
    const Normalization norm = fit_normalization(train_set, dataset.region_names);
    encoder.encode_all(train_set);
    apply_normalization(train_set, norm);

    FaaeModel model = make_model(model_config);
    RngStream train_rng = base.derive(train_stream_index(0));
    const TrainResult trained = train(model, to_train_samples(train_set), train_rng);

    std::string trace_csv = "epoch,recon,kl,adv,gen,total\n";
    for (std::size_t epoch = 0; epoch < trained.trace.size(); ++epoch) {
        const EpochTrace& t = trained.trace[epoch];
        trace_csv += std::to_string(epoch);
        trace_csv.push_back(',');
        append_real(trace_csv, t.recon);
        trace_csv.push_back(',');
        append_real(trace_csv, t.kl);
        trace_csv.push_back(',');
        append_real(trace_csv, t.adv);
        trace_csv.push_back(',');
        append_real(trace_csv, t.gen);
        trace_csv.push_back(',');
        append_real(trace_csv, t.total());
        trace_csv.push_back('\n');
    }
    write_file_atomic(dir, "loss_trace.csv", trace_csv);
    result.written.push_back("loss_trace.csv");

    std::vector<std::string> train_ids, test_ids;
    for (std::size_t i : indices.train) train_ids.push_back(dataset.samples[i].subject_id);
    for (std::size_t i : indices.test) test_ids.push_back(dataset.samples[i].subject_id);

    const Checkpoint ckpt =
        Checkpoint::from_model(model, norm, encoder, train_ids, dataset.region_names);
    const fs::path ckpt_tmp = dir / "checkpoint.faae.tmp";
    save_checkpoint(ckpt_tmp.string(), ckpt);
    fs::rename(ckpt_tmp, dir / "checkpoint.faae");
    result.written.push_back("checkpoint.faae");

    nlohmann::json split_record;
    split_record["fraction"] = fraction;
    split_record["split_hash"] = to_hex(fnv1a64(join_lines(train_ids)));
    split_record["train_subject_ids"] = train_ids;
    split_record["test_subject_ids"] = test_ids;
    write_file_atomic(dir, "split.json", split_record.dump(2) + "\n");
    result.written.push_back("split.json");
    return result;
}

RunResult run_eval(const nlohmann::json& config, const std::string& out_dir) {
    JsonReader reader(config, "eval config");
    check_command_tag(reader, "eval");
    const std::string checkpoint_path = reader.require_text("checkpoint");
    const std::string dataset_path = reader.require_text("dataset");
    const std::uint64_t seed = reader.integer("seed", 1);
    const std::size_t replicates = reader.count("replicates", kDefaultBootstrapReplicates);
    const std::size_t effect_bootstrap =
        reader.count("effect_bootstrap", kDefaultEffectBootstrap);
    reader.finish();

    nlohmann::json manifest;
    manifest["command"] = "eval";
    manifest["checkpoint"] = checkpoint_path;
    manifest["dataset"] = dataset_path;
    manifest["seed"] = seed;
    manifest["replicates"] = replicates;
    manifest["effect_bootstrap"] = effect_bootstrap;

    const fs::path dir = prepare_out_dir(out_dir);
    RunResult result;
    write_manifest(dir, manifest, result);

    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    const Dataset dataset = load_csv(dataset_path);
    if (ckpt.config.input_dim != kNumRegions)
        throw std::invalid_argument("checkpoint expects " +
                                    std::to_string(ckpt.config.input_dim) +
                                    " features but the dataset schema provides " +
                                    std::to_string(kNumRegions));
    if (ckpt.config.uses_covariates() && ckpt.config.covariate_dim != kCovariateDim)
        throw std::invalid_argument("checkpoint expects " +
                                    std::to_string(ckpt.config.covariate_dim) +
                                    " covariates but the encoding provides " +
                                    std::to_string(kCovariateDim));
    if (ckpt.region_names != dataset.region_names)
        throw std::invalid_argument("checkpoint and dataset disagree on region names");

    // Everything the checkpoint did not train on is scored.
    const std::set<std::string> trained(ckpt.train_subject_ids.begin(),
                                        ckpt.train_subject_ids.end());
    std::vector<Sample> test_set;
    for (const Sample& s : dataset.samples)
        if (trained.count(s.subject_id) == 0) test_set.push_back(s);
    if (test_set.empty())
        throw std::invalid_argument("every dataset subject was in the training set; "
                                    "nothing to evaluate");

    const CovariateEncoder encoder{ckpt.icv_cuts};
    encoder.encode_all(test_set);
    apply_normalization(test_set, ckpt.normalization);

    const FaaeModel model = ckpt.restore();
    const DeviationReport report = score_deviation(model, test_set);
    const auto [min_it, max_it] = std::minmax_element(report.d_mse.begin(), report.d_mse.end());
    if (*min_it == *max_it)
        throw std::runtime_error(
            "degenerate scores: every evaluated subject received the identical deviation, "
            "so classification metrics are undefined");

    const RngStream base(seed);
    RngStream eval_rng = base.derive(eval_stream_index(0));
    const EvalSummary summary = bootstrap_eval(model, test_set, replicates, eval_rng);

    const DeviationReport report_hc = filter_by_label(report, Label::HC);
    const DeviationReport report_ad = filter_by_label(report, Label::AD);
    RngStream effects_rng = base.derive(kEffectsStreamIndex);
    const std::vector<RegionEffect> effects = region_effect_sizes(
        report_hc, report_ad, ckpt.region_names, effect_bootstrap, effects_rng);

    std::string deviations_csv = "subject_id,label,d_mse";
    for (const std::string& name : ckpt.region_names) deviations_csv += "," + name;
    deviations_csv.push_back('\n');
    for (std::size_t i = 0; i < report.size(); ++i) {
        deviations_csv += report.subject_ids[i];
        deviations_csv.push_back(',');
        deviations_csv += to_string(report.labels[i]);
        deviations_csv.push_back(',');
        append_real(deviations_csv, report.d_mse[i]);
        for (double r : report.regional[i]) {
            deviations_csv.push_back(',');
            append_real(deviations_csv, r);
        }
        deviations_csv.push_back('\n');
    }
    write_file_atomic(dir, "deviations.csv", deviations_csv);
    result.written.push_back("deviations.csv");

    nlohmann::json metrics;
    metrics["variant"] = to_string(ckpt.config.variant);
    metrics["auroc"] = metric_to_json(summary.auroc);
    metrics["sensitivity"] = metric_to_json(summary.sensitivity);
    metrics["specificity"] = metric_to_json(summary.specificity);
    metrics["threshold"] = summary.threshold;
    metrics["replicates"] = summary.replicates;
    metrics["formatted"] = {{"auroc", format_metric(summary.auroc)},
                            {"sensitivity", format_metric(summary.sensitivity)},
                            {"specificity", format_metric(summary.specificity)}};
    write_file_atomic(dir, "metrics.json", metrics.dump(2) + "\n");
    result.written.push_back("metrics.json");

    std::string effects_csv = "region,d,ci_low,ci_high,significant\n";
    for (const RegionEffect& effect : effects) {
        effects_csv += effect.name;
        effects_csv.push_back(',');
        append_real(effects_csv, effect.d);
        effects_csv.push_back(',');
        append_real(effects_csv, effect.ci_low);
        effects_csv.push_back(',');
        append_real(effects_csv, effect.ci_high);
        effects_csv.push_back(',');
        effects_csv += effect.significant ? "true" : "false";
        effects_csv.push_back('\n');
    }
    write_file_atomic(dir, "effects.csv", effects_csv);
    result.written.push_back("effects.csv");
    return result;
}

RunResult run_sweep(const nlohmann::json& config, const std::string& out_dir,
                    std::size_t threads) {
    JsonReader reader(config, "sweep config");
    check_command_tag(reader, "sweep");
    const std::string mode = reader.require_text("mode");
    const std::string dataset_path = reader.require_text("dataset");
    const std::uint64_t seed = reader.integer("seed", 1);
    const double fraction = reader.real("split_fraction", 0.8);
    const std::size_t replicates = reader.count("replicates", kDefaultBootstrapReplicates);
    std::vector<double> alphas = reader.real_list("alphas", {});
    std::vector<double> gammas = reader.real_list("gammas", {});
    std::vector<std::size_t> sizes = reader.count_list("sizes", {});
    const ModelConfig model_config =
        resolve_model_config(object_or_empty(reader.child("model"), "field 'model'"), seed,
                             "sweep config.model");
    reader.finish();

    if (mode == "focal_grid") {
        if (!sizes.empty())
            throw std::invalid_argument("field 'sizes' applies only to sample_size mode");
        if (alphas.empty()) alphas = {0.2, 0.5, 0.8};
        if (gammas.empty()) gammas = {0.0, 5.0, 15.0, 17.5};
    } else if (mode == "sample_size") {
        if (!alphas.empty() || !gammas.empty())
            throw std::invalid_argument(
                "fields 'alphas'/'gammas' apply only to focal_grid mode");
        if (sizes.empty()) sizes = {200, 400, 600, 800, 1000, 1200, 1400};
    } else {
        throw std::invalid_argument("unknown sweep mode '" + mode +
                                    "' (expected focal_grid or sample_size)");
    }

    nlohmann::json manifest;
    manifest["command"] = "sweep";
    manifest["mode"] = mode;
    manifest["dataset"] = dataset_path;
    manifest["seed"] = seed;
    manifest["split_fraction"] = fraction;
    manifest["replicates"] = replicates;
    manifest["alphas"] = alphas;
    manifest["gammas"] = gammas;
    manifest["sizes"] = sizes;
    manifest["model"] = model_config_to_json(model_config);

    const fs::path dir = prepare_out_dir(out_dir);
    RunResult result;
    write_manifest(dir, manifest, result);

    const Dataset dataset = load_csv(dataset_path);
    RngStream base(seed);
    RngStream split_rng = base.derive(kSplitStreamIndex);
    const SplitIndices indices = split(dataset, fraction, split_rng);
    const std::vector<Sample> train_pool = gather(dataset, indices.train);
    const std::vector<Sample> test_set = gather(dataset, indices.test);

    std::string sweep_csv;
    if (mode == "focal_grid") {
        const std::vector<SweepCell> cells =
            param_sweep(train_pool, test_set, dataset.region_names, alphas, gammas,
                        model_config, base, replicates, threads);
        sweep_csv = "alpha,gamma,auroc_mean,auroc_std,sens_mean,sens_std,spec_mean,spec_std\n";
        for (const SweepCell& cell : cells) {
            append_real(sweep_csv, cell.alpha);
            sweep_csv.push_back(',');
            append_real(sweep_csv, cell.gamma);
            sweep_csv.push_back(',');
            append_metric_columns(sweep_csv, cell.summary);
            sweep_csv.push_back('\n');
        }
    } else {
        const std::vector<SizeCell> cells =
            sample_size_sweep(train_pool, test_set, dataset.region_names, sizes, model_config,
                              base, replicates, threads);
        sweep_csv = "size,auroc_mean,auroc_std,sens_mean,sens_std,spec_mean,spec_std\n";
        for (const SizeCell& cell : cells) {
            sweep_csv += std::to_string(cell.size);
            sweep_csv.push_back(',');
            append_metric_columns(sweep_csv, cell.summary);
            sweep_csv.push_back('\n');
        }
    }
    write_file_atomic(dir, "sweep.csv", sweep_csv);
    result.written.push_back("sweep.csv");
    return result;
}

RunResult run_compare(const nlohmann::json& config, const std::string& out_dir,
                      std::size_t threads) {
    JsonReader reader(config, "compare config");
    check_command_tag(reader, "compare");
    const std::string dataset_path = reader.require_text("dataset");
    const std::uint64_t seed = reader.integer("seed", 1);
    const double fraction = reader.real("split_fraction", 0.8);
    const std::size_t replicates = reader.count("replicates", kDefaultBootstrapReplicates);
    const std::string bootstrap_mode = reader.text("bootstrap_mode", "resample");
    const ModelConfig model_config =
        resolve_model_config(object_or_empty(reader.child("model"), "field 'model'"), seed,
                             "compare config.model");
    reader.finish();
    if (bootstrap_mode != "resample" && bootstrap_mode != "resplit")
        throw std::invalid_argument("unknown bootstrap_mode '" + bootstrap_mode +
                                    "' (expected resample or resplit)");

    nlohmann::json manifest;
    manifest["command"] = "compare";
    manifest["dataset"] = dataset_path;
    manifest["seed"] = seed;
    manifest["split_fraction"] = fraction;
    manifest["replicates"] = replicates;
    manifest["bootstrap_mode"] = bootstrap_mode;
    manifest["model"] = model_config_to_json(model_config);

    const fs::path dir = prepare_out_dir(out_dir);
    RunResult result;
    write_manifest(dir, manifest, result);

    const Dataset dataset = load_csv(dataset_path);
    RngStream base(seed);

    const Variant variants[] = {Variant::AE,  Variant::VAE,   Variant::CVAE,
                                Variant::AAE, Variant::ACVAE, Variant::FAAE};
    constexpr std::size_t n_variants = std::size(variants);
    std::vector<EvalSummary> rows(n_variants);
    std::string split_hash = "resplit";

    if (bootstrap_mode == "resample") {
        RngStream split_rng = base.derive(kSplitStreamIndex);
        const SplitIndices indices = split(dataset, fraction, split_rng);
        const std::vector<Sample> train_set = gather(dataset, indices.train);
        const std::vector<Sample> test_set = gather(dataset, indices.test);
        std::vector<std::string> train_ids;
        for (std::size_t i : indices.train) train_ids.push_back(dataset.samples[i].subject_id);
        split_hash = to_hex(fnv1a64(join_lines(train_ids)));

        // Every variant sees the identical split, initialization seed, and
        // RNG streams, so rows differ only by the variant's loss structure.
        parallel_for(n_variants, threads, [&](std::size_t i) {
            ModelConfig variant_config = model_config;
            variant_config.variant = variants[i];
            rows[i] = train_and_eval(train_set, test_set, dataset.region_names, variant_config,
                                     replicates, base.derive(train_stream_index(0)),
                                     base.derive(eval_stream_index(0)));
        });
    } else {
        parallel_for(n_variants, threads, [&](std::size_t i) {
            ModelConfig variant_config = model_config;
            variant_config.variant = variants[i];
            RngStream variant_rng = base;
            rows[i] = resplit_eval(dataset, variant_config, replicates, fraction, variant_rng, 1);
        });
    }

    std::string comparison_csv =
        "variant,auroc_mean,auroc_std,sens_mean,sens_std,spec_mean,spec_std,split_hash\n";
    for (std::size_t i = 0; i < n_variants; ++i) {
        comparison_csv += to_string(variants[i]);
        comparison_csv.push_back(',');
        append_metric_columns(comparison_csv, rows[i]);
        comparison_csv.push_back(',');
        comparison_csv += split_hash;
        comparison_csv.push_back('\n');
    }
    write_file_atomic(dir, "comparison.csv", comparison_csv);
    result.written.push_back("comparison.csv");

    std::string table = "Model  AUROC          Sensitivity    Specificity\n";
    for (std::size_t i = 0; i < n_variants; ++i) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-6s %-14s %-14s %-14s\n",
                      to_string(variants[i]).c_str(), format_metric(rows[i].auroc).c_str(),
                      format_metric(rows[i].sensitivity).c_str(),
                      format_metric(rows[i].specificity).c_str());
        table += line;
    }
    write_file_atomic(dir, "comparison_table.txt", table);
    result.written.push_back("comparison_table.txt");
    return result;
}

}  // namespace faae
