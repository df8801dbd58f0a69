#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "faae/data.hpp"
#include "faae/model.hpp"
#include "faae/rng.hpp"

namespace faae {

constexpr std::size_t kDefaultBootstrapReplicates = 30;
constexpr std::size_t kDefaultEffectBootstrap = 1000;

/// Per-subject deviation scores plus the per-region squared residuals they
/// average over. Parallel arrays indexed by subject.
struct DeviationReport {
    std::vector<std::string> subject_ids;
    std::vector<Label> labels;
    Vec d_mse;
    std::vector<Vec> regional;  // squared residual per region, one row per subject

    std::size_t size() const { return d_mse.size(); }
};

/// Deterministic deviation scoring: reconstruct from the posterior mean (no
/// latent sampling) and record mean squared error plus its per-region
/// breakdown for every sample.
DeviationReport score_deviation(const FaaeModel& model, const std::vector<Sample>& samples);

DeviationReport filter_by_label(const DeviationReport& report, Label label);

/// Mann-Whitney AUROC: probability that a random positive (label 1) outscores
/// a random negative, ties counted 1/2. Exact via mid-rank tie handling.
double auroc(const Vec& scores, const std::vector<int>& labels);

struct ThresholdRule {
    enum class Kind { Youden, Fixed };
    Kind kind = Kind::Youden;
    double value = 0.0;

    static ThresholdRule youden() { return {Kind::Youden, 0.0}; }
    static ThresholdRule fixed(double threshold) { return {Kind::Fixed, threshold}; }
};

struct SensSpec {
    double sensitivity = 0.0;
    double specificity = 0.0;
    double threshold = 0.0;
};

/// Predict positive iff score > threshold. Youden picks the empirical
/// threshold maximizing sensitivity + specificity - 1, breaking ties toward
/// higher sensitivity.
SensSpec sensitivity_specificity(const Vec& scores, const std::vector<int>& labels,
                                 const ThresholdRule& rule = ThresholdRule::youden());

struct MetricSummary {
    double mean = 0.0;
    double std_dev = 0.0;
};

/// "68.56 ± 3.98" — two decimals, percent scale.
std::string format_metric(const MetricSummary& metric);

struct EvalSummary {
    MetricSummary auroc;
    MetricSummary sensitivity;
    MetricSummary specificity;
    double threshold = 0.0;  // Youden threshold on the full (un-resampled) test set
    std::size_t replicates = 0;
};

/// Scores the test set once, then bootstrap-resamples it with replacement
/// (stratified by class) n_replicates times, recomputing all three metrics
/// per replicate. Reports mean and sample std in percent. n_replicates = 1
/// evaluates the set as-is (point metrics, std 0).
EvalSummary bootstrap_eval(const FaaeModel& model, const std::vector<Sample>& test_set,
                           std::size_t n_replicates, RngStream& rng);

struct RegionEffect {
    std::size_t region = 0;
    std::string name;
    double d = 0.0;  // Cohen's d, positive when AD deviations exceed HC
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool significant = false;  // 95% interval excludes 0
};

/// Per-region Cohen's d (pooled std) between AD and HC regional deviations,
/// with a percentile-bootstrap 95% confidence interval over subject
/// resampling.
std::vector<RegionEffect> region_effect_sizes(const DeviationReport& report_hc,
                                              const DeviationReport& report_ad,
                                              const std::vector<std::string>& region_names,
                                              std::size_t n_boot, RngStream& rng);

/// Type-7 quantile (linear interpolation between order statistics); copies
/// and sorts its input.
double quantile(Vec values, double p);

/// Preprocessing fitted on the training controls and applied to both sides:
/// ICV decile cuts, covariate encoding, feature normalization.
struct Prepared {
    std::vector<Sample> train;
    std::vector<Sample> test;
    Normalization normalization;
    CovariateEncoder encoder;
};

Prepared prepare_sets(std::vector<Sample> train_hc, std::vector<Sample> test,
                      const std::vector<std::string>& region_names);

std::vector<TrainSample> to_train_samples(const std::vector<Sample>& samples);

/// One full protocol run: fit preprocessing on the given raw training
/// controls, train a fresh model (initialization from config.seed), and
/// bootstrap-evaluate on the shared raw test set. Sweep cells and comparison
/// rows are exactly this function applied per cell, with their train/eval
/// streams derived so a degenerate sweep reproduces a standalone
/// train-then-evaluate run bit for bit.
EvalSummary train_and_eval(const std::vector<Sample>& train_hc, const std::vector<Sample>& test,
                           const std::vector<std::string>& region_names,
                           const ModelConfig& config, std::size_t n_replicates,
                           RngStream train_rng, RngStream eval_rng);

/// Stream indices for deriving per-cell streams from one base seed: cell i
/// trains with derive(train_stream_index(i)) and evaluates with
/// derive(eval_stream_index(i)), so cell 0 coincides with the standalone
/// command streams.
constexpr std::uint64_t kSplitStreamIndex = 0;
constexpr std::uint64_t train_stream_index(std::uint64_t cell) { return 1 + 2 * cell; }
constexpr std::uint64_t eval_stream_index(std::uint64_t cell) { return 2 + 2 * cell; }
constexpr std::uint64_t kEffectsStreamIndex = 1000003;

struct SweepCell {
    double alpha = 0.0;
    double gamma = 0.0;
    EvalSummary summary;
};

/// Trains one model per (alpha, gamma) cell from the identical initialization
/// seed and evaluates each on the shared test set. Inputs are raw
/// (unnormalized) samples; each cell runs the full preprocessing protocol.
/// Cells use RNG streams derived per cell index, so results are independent
/// of scheduling.
std::vector<SweepCell> param_sweep(const std::vector<Sample>& train_hc,
                                   const std::vector<Sample>& test,
                                   const std::vector<std::string>& region_names,
                                   const std::vector<double>& alphas,
                                   const std::vector<double>& gammas,
                                   const ModelConfig& base_config, RngStream& rng,
                                   std::size_t n_replicates = kDefaultBootstrapReplicates,
                                   std::size_t threads = 1);

struct SizeCell {
    std::size_t size = 0;
    EvalSummary summary;
};

/// Trains on nested subsamples of the training pool (one seeded shuffle,
/// prefix per size) and evaluates each on the shared test set.
std::vector<SizeCell> sample_size_sweep(const std::vector<Sample>& pool_hc,
                                        const std::vector<Sample>& test,
                                        const std::vector<std::string>& region_names,
                                        const std::vector<std::size_t>& sizes,
                                        const ModelConfig& config, RngStream& rng,
                                        std::size_t n_replicates = kDefaultBootstrapReplicates,
                                        std::size_t threads = 1);

/// Alternative bootstrap unit: each replicate re-draws the 80/20 split,
/// retrains from scratch, and records point metrics on its own test side.
/// Slower but captures split variance rather than evaluation variance alone.
EvalSummary resplit_eval(const Dataset& raw_dataset, const ModelConfig& config,
                         std::size_t n_replicates, double fraction, RngStream& rng,
                         std::size_t threads = 1);

}  // namespace faae
