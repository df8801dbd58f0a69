#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "faae/eval.hpp"
#include "faae/parallel.hpp"

namespace faae {

Prepared prepare_sets(std::vector<Sample> train_hc, std::vector<Sample> test,
                      const std::vector<std::string>& region_names) {
    Prepared prepared;
    prepared.encoder = CovariateEncoder::fit(train_hc);
    prepared.normalization = fit_normalization(train_hc, region_names);
    prepared.train = std::move(train_hc);
    prepared.test = std::move(test);
    prepared.encoder.encode_all(prepared.train);
    prepared.encoder.encode_all(prepared.test);
    apply_normalization(prepared.train, prepared.normalization);
    apply_normalization(prepared.test, prepared.normalization);
    return prepared;
}

std::vector<TrainSample> to_train_samples(const std::vector<Sample>& samples) {
    std::vector<TrainSample> out;
    out.reserve(samples.size());
    for (const Sample& s : samples)
        out.push_back(TrainSample{s.features, s.covariates, s.is_control()});
    return out;
}

EvalSummary train_and_eval(const std::vector<Sample>& train_hc, const std::vector<Sample>& test,
                           const std::vector<std::string>& region_names,
                           const ModelConfig& config, std::size_t n_replicates,
                           RngStream train_rng, RngStream eval_rng) {
    const Prepared prepared = prepare_sets(train_hc, test, region_names);
    FaaeModel model = make_model(config);
    train(model, to_train_samples(prepared.train), train_rng);
    return bootstrap_eval(model, prepared.test, n_replicates, eval_rng);
}

std::vector<SweepCell> param_sweep(const std::vector<Sample>& train_hc,
                                   const std::vector<Sample>& test,
                                   const std::vector<std::string>& region_names,
                                   const std::vector<double>& alphas,
                                   const std::vector<double>& gammas,
                                   const ModelConfig& base_config, RngStream& rng,
                                   std::size_t n_replicates, std::size_t threads) {
    if (alphas.empty() || gammas.empty())
        throw std::invalid_argument("parameter sweep needs nonempty alpha and gamma grids");
    std::vector<SweepCell> cells(alphas.size() * gammas.size());
    parallel_for(cells.size(), threads, [&](std::size_t i) {
        const double alpha = alphas[i / gammas.size()];
        const double gamma = gammas[i % gammas.size()];
        ModelConfig config = base_config;
        config.alpha = alpha;
        config.gamma = gamma;
        config.validate();
        cells[i].alpha = alpha;
        cells[i].gamma = gamma;
        cells[i].summary = train_and_eval(train_hc, test, region_names, config, n_replicates,
                                          rng.derive(train_stream_index(i)),
                                          rng.derive(eval_stream_index(i)));
    });
    return cells;
}

std::vector<SizeCell> sample_size_sweep(const std::vector<Sample>& pool_hc,
                                        const std::vector<Sample>& test,
                                        const std::vector<std::string>& region_names,
                                        const std::vector<std::size_t>& sizes,
                                        const ModelConfig& config, RngStream& rng,
                                        std::size_t n_replicates, std::size_t threads) {
    if (sizes.empty()) throw std::invalid_argument("sample-size sweep needs nonempty sizes");
    for (const Sample& s : pool_hc)
        if (!s.is_control())
            throw std::invalid_argument("sample-size sweep pool must contain controls only");
    for (std::size_t size : sizes) {
        if (size < 2)
            throw std::invalid_argument("sample-size sweep sizes must be >= 2");
        if (size > pool_hc.size())
            throw std::invalid_argument("sweep size " + std::to_string(size) +
                                        " exceeds the training pool (" +
                                        std::to_string(pool_hc.size()) + ")");
    }

    // One seeded shuffle; every size takes a prefix, so smaller training
    // sets are nested inside larger ones.
    std::vector<std::size_t> order(pool_hc.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    RngStream shuffle_rng = rng.derive(0x5873FF1E);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        const std::size_t j = shuffle_rng.uniform_below(i + 1);
        std::swap(order[i], order[j]);
    }

    std::vector<SizeCell> cells(sizes.size());
    parallel_for(cells.size(), threads, [&](std::size_t i) {
        std::vector<Sample> subset;
        subset.reserve(sizes[i]);
        for (std::size_t k = 0; k < sizes[i]; ++k) subset.push_back(pool_hc[order[k]]);
        cells[i].size = sizes[i];
        cells[i].summary = train_and_eval(subset, test, region_names, config, n_replicates,
                                          rng.derive(train_stream_index(i)),
                                          rng.derive(eval_stream_index(i)));
    });
    return cells;
}

EvalSummary resplit_eval(const Dataset& raw_dataset, const ModelConfig& config,
                         std::size_t n_replicates, double fraction, RngStream& rng,
                         std::size_t threads) {
    if (n_replicates == 0) throw std::invalid_argument("resplit bootstrap needs >= 1 replicate");
    Vec auroc_values(n_replicates), sens_values(n_replicates), spec_values(n_replicates),
        thresholds(n_replicates);
    parallel_for(n_replicates, threads, [&](std::size_t rep) {
        RngStream split_rng = rng.derive(kSplitStreamIndex).derive(rep);
        const SplitIndices indices = split(raw_dataset, fraction, split_rng);
        const EvalSummary point =
            train_and_eval(gather(raw_dataset, indices.train), gather(raw_dataset, indices.test),
                           raw_dataset.region_names, config, 1,
                           rng.derive(train_stream_index(rep)),
                           rng.derive(eval_stream_index(rep)));
        auroc_values[rep] = point.auroc.mean;
        sens_values[rep] = point.sensitivity.mean;
        spec_values[rep] = point.specificity.mean;
        thresholds[rep] = point.threshold;
    });

    const auto summarize = [&](const Vec& values) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        const double std_dev =
            values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
        return MetricSummary{mean, std_dev};
    };
    EvalSummary summary;
    summary.auroc = summarize(auroc_values);
    summary.sensitivity = summarize(sens_values);
    summary.specificity = summarize(spec_values);
    summary.threshold = summarize(thresholds).mean;
    summary.replicates = n_replicates;
    return summary;
}

}  // namespace faae
