#include "hamlearn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hamlearn {

namespace {

double sorted_quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double quantile(std::span<const double> samples, double q) {
    if (samples.empty()) throw std::invalid_argument("quantile: no samples");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must be in [0, 1]");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    return sorted_quantile(s, q);
}

Summary summarize(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("summarize: no samples");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    Summary out;
    out.count = s.size();
    const double n = static_cast<double>(s.size());
    for (double x : samples) out.mean += x;
    out.mean /= n;
    double var = 0.0;
    for (double x : samples) var += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(var / n);
    out.median = sorted_quantile(s, 0.5);
    out.p25 = sorted_quantile(s, 0.25);
    out.p75 = sorted_quantile(s, 0.75);
    out.min = s.front();
    out.max = s.back();
    return out;
}

Interval bootstrap_ci(std::span<const double> samples, std::size_t n_resamples, double level, Rng& rng) {
    if (samples.size() < 2) throw std::invalid_argument("bootstrap_ci: need at least two samples");
    if (n_resamples < 1) throw std::invalid_argument("bootstrap_ci: need at least one resample");
    if (!(level >= 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap_ci: level must be in [0, 1)");
    std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
    std::vector<double> means(n_resamples);
    for (auto& m : means) {
        double sum = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) sum += samples[pick(rng)];
        m = sum / static_cast<double>(samples.size());
    }
    std::sort(means.begin(), means.end());
    return {sorted_quantile(means, 0.5 * (1.0 - level)), sorted_quantile(means, 0.5 * (1.0 + level))};
}

Histogram log_histogram(std::span<const double> samples, std::size_t bins) {
    if (samples.empty() || bins == 0) throw std::invalid_argument("log_histogram: empty input");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double x : samples)
        if (x > 0.0 && std::isfinite(x)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    if (!std::isfinite(lo)) {
        lo = 1.0;
        hi = 1.0;
    }
    const double log_lo = std::log10(lo) - 1.0;
    const double log_hi = std::log10(hi) + 1.0;
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b)
        h.edges[b] = std::pow(10.0, log_lo + (log_hi - log_lo) * static_cast<double>(b) / static_cast<double>(bins));
    h.counts.assign(bins, 0);
    for (double x : samples) {
        std::size_t b = 0;
        if (x > 0.0) {
            const double pos = (std::log10(x) - log_lo) / (log_hi - log_lo) * static_cast<double>(bins);
            b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
        }
        ++h.counts[b];
    }
    return h;
}

}  // namespace hamlearn
