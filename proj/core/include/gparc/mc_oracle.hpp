#pragma once

// Monte Carlo ground truth for arc lengths: draw GP paths on a grid and
// rectify them by chord sums.

#include "gparc/arclength.hpp"
#include "gparc/gp.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gparc::mc {

/// GraphLength1D rectifies (t, f(t)), the graph length; VectorLength
/// rectifies f(t) itself.
enum class LengthMode { GraphLength1D, VectorLength };

struct McReport {
    std::size_t sample_count = 0;
    double empirical_mean = 0.0;
    double empirical_variance = 0.0;  // unbiased
    double mean_std_error = 0.0;
    std::size_t grid_size = 0;
    std::uint64_t seed = 0;
    std::vector<double> lengths;  // per draw, in draw order
};

struct Histogram {
    std::vector<double> edges;        // bin_count + 1
    std::vector<std::size_t> counts;  // bin_count
};

/// sum_i |p_{i+1} - p_i| for the rows of `points` (M x D). In graph mode the
/// grid value is prepended as an extra coordinate.
double path_length(const Eigen::MatrixXd& points, std::span<const double> grid,
                   LengthMode mode = LengthMode::VectorLength);

/// `count` evenly spaced points from a to b, endpoints exact.
std::vector<double> uniform_grid(double a, double b, std::size_t count);

/// Pairwise (cascade) summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

/// Mean, unbiased variance and standard error of `lengths`.
McReport summarize(std::vector<double> lengths, std::size_t grid_size, std::uint64_t seed);

/// Draws `count` joint paths on a uniform grid over the interval and returns
/// their length statistics. Draw k uses Philox stream (seed, k); draws are
/// generated in fixed batches so the output is reproducible bit for bit.
McReport empirical_arclength(const gp::GpPosterior& gp, const arclength::Interval& iv,
                             std::size_t grid_size, std::size_t count, std::uint64_t seed,
                             LengthMode mode);

/// Equal-width bins over [min, max]; the maximum falls in the last bin.
Histogram histogram(std::span<const double> values, std::size_t bin_count);

}  // namespace gparc::mc
