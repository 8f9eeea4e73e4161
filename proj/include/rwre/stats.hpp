#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rwre/errors.hpp"
#include "rwre/rng.hpp"

namespace rwre::stats {

inline double median(std::vector<double> v) {
    if (v.empty()) throw ConfigError("median of empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw ConfigError("mean of empty sample");
    double acc = 0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double slope_se = 0;
    int n = 0;

    double ci_lo() const { return slope - 1.96 * slope_se; }
    double ci_hi() const { return slope + 1.96 * slope_se; }
};

// Ordinary least squares y = a + b x with the textbook slope standard error.
inline LinearFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ConfigError("ols_fit: size mismatch");
    const int n = static_cast<int>(x.size());
    if (n < 2) throw DegenerateFit("regression needs at least 2 points");
    const double xm = mean(x), ym = mean(y);
    double sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - xm) * (x[i] - xm);
        sxy += (x[i] - xm) * (y[i] - ym);
    }
    if (sxx == 0) throw DegenerateFit("regression abscissae are all equal");
    LinearFit fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    if (n > 2) {
        double rss = 0;
        for (int i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            rss += r * r;
        }
        fit.slope_se = std::sqrt(rss / (n - 2) / sxx);
    }
    return fit;
}

struct RatioCI {
    double lo = 0, hi = 0;
};

// Percentile bootstrap CI for the ratio of two Bernoulli proportions,
// computed on log((k+1/2)/(n+1)) differences so zero counts stay finite.
inline RatioCI bootstrap_proportion_ratio_ci(std::int64_t k_a, std::int64_t n_a, std::int64_t k_b,
                                             std::int64_t n_b, int resamples, std::uint64_t seed,
                                             double level = 0.95) {
    if (n_a <= 0 || n_b <= 0) throw ConfigError("bootstrap needs positive sample sizes");
    const double pa = static_cast<double>(k_a) / static_cast<double>(n_a);
    const double pb = static_cast<double>(k_b) / static_cast<double>(n_b);
    const std::uint64_t key = rng::derive_key(seed, {rng::kSaltBootstrap});

    std::vector<double> log_ratios(static_cast<std::size_t>(resamples));
    std::uint64_t counter = 0;
    for (int r = 0; r < resamples; ++r) {
        std::int64_t ka = 0, kb = 0;
        for (std::int64_t i = 0; i < n_a; ++i)
            if (rng::unit_at(key, counter++) < pa) ++ka;
        for (std::int64_t i = 0; i < n_b; ++i)
            if (rng::unit_at(key, counter++) < pb) ++kb;
        const double la = std::log((static_cast<double>(ka) + 0.5) / (static_cast<double>(n_a) + 1.0));
        const double lb = std::log((static_cast<double>(kb) + 0.5) / (static_cast<double>(n_b) + 1.0));
        log_ratios[static_cast<std::size_t>(r)] = la - lb;
    }
    std::sort(log_ratios.begin(), log_ratios.end());
    const double alpha = 0.5 * (1.0 - level);
    const auto pick = [&](double q) {
        const auto idx = static_cast<std::size_t>(q * (static_cast<double>(log_ratios.size()) - 1));
        return log_ratios[idx];
    };
    return RatioCI{std::exp(pick(alpha)), std::exp(pick(1.0 - alpha))};
}

} // namespace rwre::stats
