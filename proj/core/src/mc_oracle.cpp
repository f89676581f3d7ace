#include "gparc/mc_oracle.hpp"

#include "gparc/error.hpp"

#include <algorithm>
#include <cmath>

namespace gparc::mc {

namespace {

constexpr std::size_t kBatch = 64;

}  // namespace

double path_length(const Eigen::MatrixXd& points, std::span<const double> grid, LengthMode mode) {
    const Eigen::Index m = points.rows();
    if (m < 2) throw InputError("path_length: need at least two points");
    const bool graph = mode == LengthMode::GraphLength1D;
    if (graph && static_cast<Eigen::Index>(grid.size()) != m) {
        throw InputError("path_length: grid size does not match the point count");
    }
    std::vector<double> chords(static_cast<std::size_t>(m - 1));
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        double sq = (points.row(i + 1) - points.row(i)).squaredNorm();
        if (graph) {
            const double dt = grid[static_cast<std::size_t>(i + 1)] - grid[static_cast<std::size_t>(i)];
            sq += dt * dt;
        }
        chords[static_cast<std::size_t>(i)] = std::sqrt(sq);
    }
    return pairwise_sum(chords);
}

std::vector<double> uniform_grid(double a, double b, std::size_t count) {
    if (count < 2) throw InputError("uniform_grid: need at least two points");
    if (!(b > a)) throw InputError("uniform_grid: need b > a");
    std::vector<double> grid(count);
    const double step = (b - a) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid[i] = a + step * static_cast<double>(i);
    grid.back() = b;
    return grid;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

McReport summarize(std::vector<double> lengths, std::size_t grid_size, std::uint64_t seed) {
    const std::size_t n = lengths.size();
    if (n < 2) throw InputError("summarize: need at least two samples");
    McReport r;
    r.sample_count = n;
    r.grid_size = grid_size;
    r.seed = seed;
    r.empirical_mean = pairwise_sum(lengths) / static_cast<double>(n);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dev = lengths[i] - r.empirical_mean;
        sq[i] = dev * dev;
    }
    r.empirical_variance = pairwise_sum(sq) / static_cast<double>(n - 1);
    r.mean_std_error = std::sqrt(r.empirical_variance / static_cast<double>(n));
    r.lengths = std::move(lengths);
    return r;
}

McReport empirical_arclength(const gp::GpPosterior& gp, const arclength::Interval& iv,
                             std::size_t grid_size, std::size_t count, std::uint64_t seed,
                             LengthMode mode) {
    iv.validate();
    if (grid_size < 2) throw InputError("empirical_arclength: grid_size must be >= 2");
    if (count < 2) throw InputError("empirical_arclength: count must be >= 2");
    const gp::PathSampler sampler(gp, uniform_grid(iv.a, iv.b, grid_size));
    std::vector<double> lengths;
    lengths.reserve(count);
    for (std::size_t first = 0; first < count; first += kBatch) {
        const std::size_t batch = std::min(kBatch, count - first);
        for (const Eigen::MatrixXd& path : sampler.draw(seed, first, batch)) {
            lengths.push_back(path_length(path, sampler.grid(), mode));
        }
    }
    return summarize(std::move(lengths), grid_size, seed);
}

Histogram histogram(std::span<const double> values, std::size_t bin_count) {
    if (bin_count < 1) throw InputError("histogram: bin_count must be >= 1");
    if (values.empty()) throw InputError("histogram: no values");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    Histogram h;
    h.counts.assign(bin_count, 0);
    h.edges.resize(bin_count + 1);
    const double width = (hi - lo) / static_cast<double>(bin_count);
    for (std::size_t i = 0; i <= bin_count; ++i) h.edges[i] = lo + width * static_cast<double>(i);
    h.edges.back() = hi;
    for (double v : values) {
        std::size_t bin = 0;
        if (width > 0.0) {
            bin = static_cast<std::size_t>((v - lo) / width);
            bin = std::min(bin, bin_count - 1);
        }
        ++h.counts[bin];
    }
    return h;
}

}  // namespace gparc::mc
