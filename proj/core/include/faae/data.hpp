#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "faae/matrix.hpp"
#include "faae/rng.hpp"

namespace faae {

constexpr std::size_t kNumRegions = 100;
constexpr std::size_t kCovariateDim = 22;  // 10 age bins + 2 gender + 10 icv bins
constexpr std::size_t kIcvCutCount = 9;

enum class Label { HC, AD };
enum class Gender { F, M };

std::string to_string(Label label);
std::string to_string(Gender gender);

struct Sample {
    std::string subject_id;
    Vec features;  // kNumRegions ROI values
    double age = 0.0;
    Gender gender = Gender::F;
    double icv = 0.0;  // intracranial volume, cm^3
    Vec covariates;    // kCovariateDim once encoded; empty straight off disk
    Label label = Label::HC;

    bool is_control() const { return label == Label::HC; }
};

/// Per-feature statistics fitted on training controls and then applied to
/// every split.
struct Normalization {
    Vec mean;
    Vec std;
};

struct Dataset {
    std::vector<Sample> samples;
    std::vector<std::string> region_names;  // kNumRegions, unique
    std::optional<Normalization> normalization;

    std::size_t count(Label label) const;
};

/// Reads the cohort CSV (header: subject_id, roi_0..roi_99, age, gender, icv,
/// label). Raw covariate columns are retained on each sample for later
/// encoding; parse failures report the offending row (header = row 1).
Dataset load_csv(const std::string& path);

/// Writes the same schema back out, floats in shortest round-trip form.
void save_csv(const std::string& path, const Dataset& dataset);

/// Age decade bin + gender + ICV decile, one-hot each: a 22-vector with
/// exactly three ones. icv_cuts are the nine decile cut points fitted on the
/// training split.
Vec encode_covariates(double age, Gender gender, double icv, const Vec& icv_cuts);

/// Owns the frozen binning: ICV decile cuts are fitted on training controls
/// only, then reused verbatim for every later encoding (no test leakage).
struct CovariateEncoder {
    Vec icv_cuts;  // kIcvCutCount strictly increasing values

    static CovariateEncoder fit(const std::vector<Sample>& train_samples);
    Vec encode(double age, Gender gender, double icv) const;
    void encode_all(std::vector<Sample>& samples) const;
};

/// Per-feature mean and population standard deviation over training controls.
/// A constant feature cannot be z-scored and is rejected by region name.
Normalization fit_normalization(const std::vector<Sample>& train_hc,
                                const std::vector<std::string>& region_names);

void apply_normalization(std::vector<Sample>& samples, const Normalization& norm);

struct SplitIndices {
    std::vector<std::size_t> train;  // HC only, ascending dataset order
    std::vector<std::size_t> test;   // everything else, ascending dataset order
};

/// Seeded 80/20 protocol: floor(fraction * |HC|) controls go to train, the
/// remaining controls plus every AD sample form the test set.
SplitIndices split(const Dataset& dataset, double fraction, RngStream& rng);

std::vector<Sample> gather(const Dataset& dataset, const std::vector<std::size_t>& indices);

struct SynthConfig {
    std::size_t n_hc = 500;
    std::size_t n_ad = 100;
    std::size_t n_latent_factors = 8;
    std::vector<std::size_t> affected_regions;
    double effect_size = 1.0;  // mean shift in affected regions, in HC feature stds
    double noise_std = 0.5;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Cohort with correlated ROI structure (seeded latent factors), a small
/// linear age trend on every feature, and a planted group shift for AD in the
/// affected regions. Covariates are left raw; encoding happens after the
/// split, once the ICV cuts are fitted.
Dataset generate_synthetic(const SynthConfig& config);

/// Fixed age decade bin edges used by encode_covariates, exposed for dataset
/// metadata sidecars.
std::vector<double> age_bin_edges();

}  // namespace faae
