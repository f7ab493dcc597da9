#pragma once

#include "hamlearn/rng.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace hamlearn {

/// Linearly interpolated quantile (the "type 7" rule) of unsorted samples.
double quantile(std::span<const double> samples, double q);

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    double median = 0.0;
    double p25 = 0.0;
    double p75 = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

Summary summarize(std::span<const double> samples);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Percentile bootstrap of the mean: n_resamples resamples with replacement,
/// returning the (1 - level)/2 and (1 + level)/2 quantiles of the resampled
/// means. Needs at least two samples.
Interval bootstrap_ci(std::span<const double> samples, std::size_t n_resamples, double level, Rng& rng);

struct Histogram {
    std::vector<double> edges;  // bins + 1 log-spaced edges
    std::vector<std::size_t> counts;
};

/// `bins` logarithmically spaced bins spanning the positive sample range
/// padded by one decade on each side. Non-positive samples go to the first bin.
Histogram log_histogram(std::span<const double> samples, std::size_t bins = 30);

}  // namespace hamlearn
