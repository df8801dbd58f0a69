#include "faae/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace faae {

std::string to_string(Label label) { return label == Label::HC ? "HC" : "AD"; }
std::string to_string(Gender gender) { return gender == Gender::F ? "F" : "M"; }

std::size_t Dataset::count(Label label) const {
    std::size_t n = 0;
    for (const Sample& s : samples) n += (s.label == label) ? 1 : 0;
    return n;
}

namespace {

constexpr double kAgeBinStart = 40.0;
constexpr double kAgeBinWidth = 10.0;
constexpr std::size_t kAgeBins = 10;
constexpr std::size_t kGenderBins = 2;
constexpr std::size_t kIcvBins = 10;

// Type-7 quantile (linear interpolation between order statistics) of a
// sorted vector.
double quantile_sorted(const Vec& sorted, double p) {
    const std::size_t n = sorted.size();
    const double h = static_cast<double>(n - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= n) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

std::vector<double> age_bin_edges() {
    std::vector<double> edges(kAgeBins + 1);
    for (std::size_t i = 0; i <= kAgeBins; ++i)
        edges[i] = kAgeBinStart + kAgeBinWidth * static_cast<double>(i);
    return edges;
}

Vec encode_covariates(double age, Gender gender, double icv, const Vec& icv_cuts) {
    if (!std::isfinite(age) || !std::isfinite(icv))
        throw std::invalid_argument("covariate inputs must be finite");
    if (age < 0.0) throw std::invalid_argument("age must be >= 0");
    if (icv <= 0.0) throw std::invalid_argument("icv must be > 0");
    if (icv_cuts.size() != kIcvCutCount)
        throw std::invalid_argument("expected " + std::to_string(kIcvCutCount) +
                                    " icv cut points, got " + std::to_string(icv_cuts.size()));
    for (std::size_t k = 1; k < icv_cuts.size(); ++k)
        if (!(icv_cuts[k - 1] < icv_cuts[k]))
            throw std::invalid_argument("icv cut points must be strictly increasing");

    std::size_t age_bin = 0;
    if (age >= kAgeBinStart) {
        age_bin = static_cast<std::size_t>((age - kAgeBinStart) / kAgeBinWidth);
        age_bin = std::min(age_bin, kAgeBins - 1);
    }
    const std::size_t gender_bin = (gender == Gender::F) ? 0 : 1;
    std::size_t icv_bin = 0;
    for (double cut : icv_cuts) icv_bin += (cut <= icv) ? 1 : 0;

    Vec out(kCovariateDim, 0.0);
    out[age_bin] = 1.0;
    out[kAgeBins + gender_bin] = 1.0;
    out[kAgeBins + kGenderBins + icv_bin] = 1.0;
    return out;
}

CovariateEncoder CovariateEncoder::fit(const std::vector<Sample>& train_samples) {
    if (train_samples.size() < 2)
        throw std::invalid_argument("need at least 2 samples to fit icv deciles");
    Vec icv_values;
    icv_values.reserve(train_samples.size());
    for (const Sample& s : train_samples) icv_values.push_back(s.icv);
    std::sort(icv_values.begin(), icv_values.end());

    CovariateEncoder encoder;
    encoder.icv_cuts.reserve(kIcvCutCount);
    for (std::size_t k = 1; k <= kIcvCutCount; ++k)
        encoder.icv_cuts.push_back(quantile_sorted(icv_values, 0.1 * static_cast<double>(k)));
    for (std::size_t k = 1; k < encoder.icv_cuts.size(); ++k)
        if (!(encoder.icv_cuts[k - 1] < encoder.icv_cuts[k]))
            throw std::invalid_argument(
                "icv values are too concentrated to form strictly increasing decile cuts");
    return encoder;
}

Vec CovariateEncoder::encode(double age, Gender gender, double icv) const {
    return encode_covariates(age, gender, icv, icv_cuts);
}

void CovariateEncoder::encode_all(std::vector<Sample>& samples) const {
    for (Sample& s : samples) s.covariates = encode(s.age, s.gender, s.icv);
}

Normalization fit_normalization(const std::vector<Sample>& train_hc,
                                const std::vector<std::string>& region_names) {
    if (train_hc.size() < 2)
        throw std::invalid_argument("need at least 2 training samples to fit normalization");
    const std::size_t dim = train_hc.front().features.size();
    for (const Sample& s : train_hc)
        if (s.features.size() != dim)
            throw std::invalid_argument("training samples have inconsistent feature lengths");

    const double n = static_cast<double>(train_hc.size());
    Normalization norm;
    norm.mean.assign(dim, 0.0);
    norm.std.assign(dim, 0.0);
    for (const Sample& s : train_hc)
        for (std::size_t i = 0; i < dim; ++i) norm.mean[i] += s.features[i];
    for (std::size_t i = 0; i < dim; ++i) norm.mean[i] /= n;
    for (const Sample& s : train_hc)
        for (std::size_t i = 0; i < dim; ++i) {
            const double r = s.features[i] - norm.mean[i];
            norm.std[i] += r * r;
        }
    for (std::size_t i = 0; i < dim; ++i) {
        norm.std[i] = std::sqrt(norm.std[i] / n);
        if (norm.std[i] < 1e-12) {
            const std::string name =
                i < region_names.size() ? region_names[i] : "feature " + std::to_string(i);
            throw std::invalid_argument("region " + name +
                                        " is constant in the training set; cannot normalize");
        }
    }
    return norm;
}

void apply_normalization(std::vector<Sample>& samples, const Normalization& norm) {
    for (Sample& s : samples) {
        if (s.features.size() != norm.mean.size())
            throw std::invalid_argument("sample feature length does not match normalization");
        for (std::size_t i = 0; i < s.features.size(); ++i)
            s.features[i] = (s.features[i] - norm.mean[i]) / norm.std[i];
    }
}

SplitIndices split(const Dataset& dataset, double fraction, RngStream& rng) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("split fraction must lie strictly inside (0, 1)");
    std::vector<std::size_t> hc_indices;
    std::size_t n_ad = 0;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        if (dataset.samples[i].is_control())
            hc_indices.push_back(i);
        else
            ++n_ad;
    }
    if (hc_indices.size() < 5 || n_ad < 1)
        throw std::invalid_argument("split needs at least 5 HC and 1 AD sample, got " +
                                    std::to_string(hc_indices.size()) + " HC and " +
                                    std::to_string(n_ad) + " AD");

    // Fisher-Yates over the HC pool, then keep the first floor(fraction * n)
    // as the training set (restored to dataset order).
    std::vector<std::size_t> shuffled = hc_indices;
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
        const std::size_t j = rng.uniform_below(i + 1);
        std::swap(shuffled[i], shuffled[j]);
    }
    const std::size_t n_train =
        static_cast<std::size_t>(fraction * static_cast<double>(hc_indices.size()));

    SplitIndices out;
    out.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::sort(out.train.begin(), out.train.end());
    std::vector<bool> in_train(dataset.samples.size(), false);
    for (std::size_t i : out.train) in_train[i] = true;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i)
        if (!in_train[i]) out.test.push_back(i);
    return out;
}

std::vector<Sample> gather(const Dataset& dataset, const std::vector<std::size_t>& indices) {
    std::vector<Sample> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= dataset.samples.size())
            throw std::out_of_range("sample index " + std::to_string(i) + " out of range");
        out.push_back(dataset.samples[i]);
    }
    return out;
}

}  // namespace faae
