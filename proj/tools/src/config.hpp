#pragma once

// Run configuration for the gparc command-line tool, read from JSON.
//
//   {
//     "kernel": {"family": "m32", "signal_variance": 1, "length_scale": 1, "rq_shape": 1},
//     "B": [[1, 0], [0, 1]],
//     "interval": {"a": 0, "b": 1},
//     "observations_path": "data.csv",
//     "noise_variance": 0.0,
//     "quadrature": {"nodes_per_axis": 128, "refinements": 1, "abs_tol": 1e-8, "rel_tol": 1e-8},
//     "series": {"rel_tol": 1e-10, "max_terms": 60, "correlation": "prior-stationary"},
//     "mc": {"count": 2000, "grid_size": 2000, "seed": 0}
//   }
//
// Only "kernel" is required. Without "B" the model is the scalar graph length;
// with "B" (any size, including 1x1) it is the vector length |f'|.

#include "gparc/arclength.hpp"
#include "gparc/gp.hpp"
#include "gparc/kernels.hpp"
#include "gparc/quadrature.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gparc::cli {

struct McSettings {
    std::size_t count = 2000;
    std::size_t grid_size = 2000;
    std::uint64_t seed = 0;
};

struct RunConfig {
    kernels::KernelSpec kernel;
    std::optional<Eigen::MatrixXd> mixing;
    arclength::Interval interval;
    std::optional<std::filesystem::path> observations_path;  // resolved against the config dir
    std::vector<double> noise_variance{0.0};
    quadrature::QuadratureSpec quadrature;
    arclength::SeriesPolicy series;
    McSettings mc;

    bool vector_model() const { return mixing.has_value(); }
    Eigen::Index output_dim() const { return mixing ? mixing->rows() : 1; }
    kernels::CoregionalizedKernel coregionalized() const;
};

/// Parses and validates a config document. Throws InputError with the
/// offending key on unknown keys, wrong types or invalid values.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);

/// Reads an observations CSV with header t,y1,...,yD. Returns nullopt for a
/// header-only file (no observations).
std::optional<gp::Observations> load_observations(const std::filesystem::path& path,
                                                  Eigen::Index expected_outputs,
                                                  const std::vector<double>& noise_variance);

/// Prior when no observations are configured or the CSV has no rows,
/// otherwise the fitted posterior.
gp::GpPosterior build_model(const RunConfig& cfg, bool require_observations);

}  // namespace gparc::cli
