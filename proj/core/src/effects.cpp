#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "faae/eval.hpp"

namespace faae {

namespace {

struct GroupStats {
    double mean = 0.0;
    double var = 0.0;  // sample variance (n - 1)
};

GroupStats group_stats(const Vec& values) {
    const double n = static_cast<double>(values.size());
    GroupStats stats;
    for (double v : values) stats.mean += v;
    stats.mean /= n;
    for (double v : values) stats.var += (v - stats.mean) * (v - stats.mean);
    stats.var /= (n - 1.0);
    return stats;
}

// Cohen's d with pooled standard deviation; positive when the AD group mean
// exceeds the HC group mean. Returns false when the pooled spread is zero.
bool cohens_d(const Vec& hc, const Vec& ad, double& out) {
    const GroupStats hs = group_stats(hc);
    const GroupStats as = group_stats(ad);
    const double n1 = static_cast<double>(hc.size());
    const double n2 = static_cast<double>(ad.size());
    const double pooled_var =
        ((n1 - 1.0) * hs.var + (n2 - 1.0) * as.var) / (n1 + n2 - 2.0);
    if (!(pooled_var > 0.0)) return false;
    out = (as.mean - hs.mean) / std::sqrt(pooled_var);
    return true;
}

}  // namespace

std::vector<RegionEffect> region_effect_sizes(const DeviationReport& report_hc,
                                              const DeviationReport& report_ad,
                                              const std::vector<std::string>& region_names,
                                              std::size_t n_boot, RngStream& rng) {
    if (report_hc.size() < 2 || report_ad.size() < 2)
        throw std::invalid_argument("effect sizes need at least 2 subjects per group");
    if (report_hc.regional.front().size() != report_ad.regional.front().size())
        throw std::invalid_argument("deviation reports have different region counts");
    if (n_boot < 2) throw std::invalid_argument("effect-size bootstrap needs >= 2 resamples");
    const std::size_t n_regions = report_hc.regional.front().size();
    if (region_names.size() != n_regions)
        throw std::invalid_argument("region name count does not match the reports");

    const std::size_t n_hc = report_hc.size();
    const std::size_t n_ad = report_ad.size();

    std::vector<RegionEffect> effects;
    effects.reserve(n_regions);
    Vec hc_values(n_hc), ad_values(n_ad);
    for (std::size_t r = 0; r < n_regions; ++r) {
        for (std::size_t i = 0; i < n_hc; ++i) hc_values[i] = report_hc.regional[i][r];
        for (std::size_t i = 0; i < n_ad; ++i) ad_values[i] = report_ad.regional[i][r];

        RegionEffect effect;
        effect.region = r;
        effect.name = region_names[r];
        if (!cohens_d(hc_values, ad_values, effect.d))
            throw std::runtime_error("region " + effect.name +
                                     " has zero pooled deviation spread; effect size undefined");

        RngStream region_rng = rng.derive(r);
        Vec boot_d;
        boot_d.reserve(n_boot);
        Vec hc_resampled(n_hc), ad_resampled(n_ad);
        for (std::size_t b = 0; b < n_boot; ++b) {
            for (std::size_t i = 0; i < n_hc; ++i)
                hc_resampled[i] = hc_values[region_rng.uniform_below(n_hc)];
            for (std::size_t i = 0; i < n_ad; ++i)
                ad_resampled[i] = ad_values[region_rng.uniform_below(n_ad)];
            double d = 0.0;
            if (!cohens_d(hc_resampled, ad_resampled, d))
                throw std::runtime_error("region " + effect.name +
                                         " has zero pooled deviation spread in a bootstrap "
                                         "resample; effect size undefined");
            boot_d.push_back(d);
        }
        effect.ci_low = quantile(boot_d, 0.025);
        effect.ci_high = quantile(boot_d, 0.975);
        // A confidence interval that excludes its own point estimate is not
        // meaningful; widen minimally so d always lies inside.
        effect.ci_low = std::min(effect.ci_low, effect.d);
        effect.ci_high = std::max(effect.ci_high, effect.d);
        effect.significant = (effect.ci_low > 0.0) || (effect.ci_high < 0.0);
        effects.push_back(std::move(effect));
    }
    return effects;
}

}  // namespace faae
