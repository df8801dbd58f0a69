#include "faae/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace faae {

namespace {

void check_both_classes(const std::vector<int>& labels) {
    bool has_pos = false;
    bool has_neg = false;
    for (int y : labels) {
        if (y == 1)
            has_pos = true;
        else if (y == 0)
            has_neg = true;
        else
            throw std::invalid_argument("labels must be 0 or 1");
    }
    if (!has_pos || !has_neg)
        throw std::invalid_argument("metric needs both classes present");
}

double mean_of(const Vec& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1); zero for a single value.
double sample_std(const Vec& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

double quantile(Vec values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of empty vector");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile p must be in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = static_cast<double>(values.size() - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

DeviationReport score_deviation(const FaaeModel& model, const std::vector<Sample>& samples) {
    DeviationReport report;
    report.subject_ids.reserve(samples.size());
    report.labels.reserve(samples.size());
    report.d_mse.reserve(samples.size());
    report.regional.reserve(samples.size());
    for (const Sample& s : samples) {
        if (s.features.size() != model.config.input_dim)
            throw std::invalid_argument("sample " + s.subject_id + " has " +
                                        std::to_string(s.features.size()) +
                                        " features, model expects " +
                                        std::to_string(model.config.input_dim));
        const GaussianLatent latent = model.encode(s.features, s.covariates);
        const Vec x_hat = model.decode(latent.mu, s.covariates);
        Vec squared(s.features.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < s.features.size(); ++i) {
            const double r = s.features[i] - x_hat[i];
            squared[i] = r * r;
            sum += squared[i];
        }
        report.subject_ids.push_back(s.subject_id);
        report.labels.push_back(s.label);
        report.d_mse.push_back(sum / static_cast<double>(s.features.size()));
        report.regional.push_back(std::move(squared));
    }
    return report;
}

DeviationReport filter_by_label(const DeviationReport& report, Label label) {
    DeviationReport out;
    for (std::size_t i = 0; i < report.size(); ++i) {
        if (report.labels[i] != label) continue;
        out.subject_ids.push_back(report.subject_ids[i]);
        out.labels.push_back(report.labels[i]);
        out.d_mse.push_back(report.d_mse[i]);
        out.regional.push_back(report.regional[i]);
    }
    return out;
}

double auroc(const Vec& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("scores and labels have different lengths");
    check_both_classes(labels);
    for (double s : scores)
        if (!std::isfinite(s)) throw std::invalid_argument("scores must be finite");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Mid-rank Mann-Whitney: rank sum of positives, tie groups share the
    // average rank. Half-integer ranks are exact in doubles at this scale.
    double pos_rank_sum = 0.0;
    std::size_t n_pos = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double mid_rank = 0.5 * static_cast<double>((i + 1) + (j + 1));
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[order[k]] == 1) {
                pos_rank_sum += mid_rank;
                ++n_pos;
            }
        }
        i = j + 1;
    }
    const std::size_t n_neg = scores.size() - n_pos;
    const double u = pos_rank_sum -
                     0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

namespace {

SensSpec metrics_at_threshold(const Vec& scores, const std::vector<int>& labels, double t) {
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted_positive = scores[i] > t;
        if (labels[i] == 1)
            predicted_positive ? ++tp : ++fn;
        else
            predicted_positive ? ++fp : ++tn;
    }
    SensSpec out;
    out.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
    out.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
    out.threshold = t;
    return out;
}

}  // namespace

SensSpec sensitivity_specificity(const Vec& scores, const std::vector<int>& labels,
                                 const ThresholdRule& rule) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("scores and labels have different lengths");
    check_both_classes(labels);
    if (rule.kind == ThresholdRule::Kind::Fixed)
        return metrics_at_threshold(scores, labels, rule.value);

    Vec candidates = scores;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    SensSpec best = metrics_at_threshold(scores, labels, candidates.front());
    double best_j = best.sensitivity + best.specificity - 1.0;
    for (std::size_t k = 1; k < candidates.size(); ++k) {
        const SensSpec current = metrics_at_threshold(scores, labels, candidates[k]);
        const double j = current.sensitivity + current.specificity - 1.0;
        if (j > best_j || (j == best_j && current.sensitivity > best.sensitivity)) {
            best = current;
            best_j = j;
        }
    }
    return best;
}

std::string format_metric(const MetricSummary& metric) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", metric.mean, metric.std_dev);
    return buf;
}

EvalSummary bootstrap_eval(const FaaeModel& model, const std::vector<Sample>& test_set,
                           std::size_t n_replicates, RngStream& rng) {
    if (n_replicates == 0) throw std::invalid_argument("bootstrap needs at least 1 replicate");
    const DeviationReport report = score_deviation(model, test_set);
    std::vector<int> labels(report.size());
    for (std::size_t i = 0; i < report.size(); ++i)
        labels[i] = (report.labels[i] == Label::AD) ? 1 : 0;
    check_both_classes(labels);

    const SensSpec point = sensitivity_specificity(report.d_mse, labels);

    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
        (labels[i] == 1 ? pos_idx : neg_idx).push_back(i);

    Vec auroc_values, sens_values, spec_values;
    auroc_values.reserve(n_replicates);
    sens_values.reserve(n_replicates);
    spec_values.reserve(n_replicates);

    if (n_replicates == 1) {
        auroc_values.push_back(auroc(report.d_mse, labels));
        sens_values.push_back(point.sensitivity);
        spec_values.push_back(point.specificity);
    } else {
        for (std::size_t rep = 0; rep < n_replicates; ++rep) {
            RngStream rep_rng = rng.derive(rep);
            Vec scores;
            std::vector<int> rep_labels;
            scores.reserve(labels.size());
            rep_labels.reserve(labels.size());
            // Stratified: resample each class within itself so both survive.
            for (std::size_t k = 0; k < neg_idx.size(); ++k) {
                scores.push_back(report.d_mse[neg_idx[rep_rng.uniform_below(neg_idx.size())]]);
                rep_labels.push_back(0);
            }
            for (std::size_t k = 0; k < pos_idx.size(); ++k) {
                scores.push_back(report.d_mse[pos_idx[rep_rng.uniform_below(pos_idx.size())]]);
                rep_labels.push_back(1);
            }
            auroc_values.push_back(auroc(scores, rep_labels));
            const SensSpec rep_metrics = sensitivity_specificity(scores, rep_labels);
            sens_values.push_back(rep_metrics.sensitivity);
            spec_values.push_back(rep_metrics.specificity);
        }
    }

    const auto to_percent = [](const Vec& values) {
        return MetricSummary{100.0 * mean_of(values), 100.0 * sample_std(values)};
    };
    EvalSummary summary;
    summary.auroc = to_percent(auroc_values);
    summary.sensitivity = to_percent(sens_values);
    summary.specificity = to_percent(spec_values);
    summary.threshold = point.threshold;
    summary.replicates = n_replicates;
    return summary;
}

}  // namespace faae
