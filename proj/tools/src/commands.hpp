#pragma once

#include "config.hpp"

#include "gparc/arclength.hpp"
#include "gparc/mc_oracle.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gparc::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kNumericalError = 3 };

nlohmann::json moments_to_json(const arclength::ArcLengthMoments& m);
nlohmann::json mc_report_to_json(const mc::McReport& r);

/// Arc-length moments of the configured prior.
nlohmann::json cmd_prior_moments(const RunConfig& cfg);

/// Arc-length moments of the GP conditioned on the configured observations.
nlohmann::json cmd_posterior_moments(const RunConfig& cfg);

struct IntegrandGrid {
    double mu = 0.0;
    double sigma = 1.0;
    std::optional<double> y_max;  // default sqrt(1 + (|mu| + 10 sigma)^2)
    std::size_t points = 2001;
};

/// CSV y,pdf,cdf on 1 <= y <= y_max, clustered cubically towards y = 1
/// where the density has an integrable singularity.
std::string cmd_integrand_pdf(const IntegrandGrid& grid);

/// CSV lambda,sigma,log_mean of the scalar prior mean over the configured
/// interval, lambda the kernel amplitude (signal variance lambda^2).
std::string cmd_heatmap(const RunConfig& cfg, const std::vector<double>& lambdas,
                        const std::vector<double>& sigmas);

struct SampleLengths {
    std::string csv;      // draw_index,length
    nlohmann::json report;
};

SampleLengths cmd_sample_lengths(const RunConfig& cfg);

struct ValidateResult {
    nlohmann::json report;
    bool passed = true;  // |z_mean| <= 4
};

ValidateResult cmd_validate(const RunConfig& cfg);

/// Parses "v1,v2,..." or "lo:hi:n" (n geometrically spaced values).
std::vector<double> parse_grid(const std::string& spec, const std::string& what);

/// Entry point of the gparc executable.
int run(int argc, char** argv);

}  // namespace gparc::cli
