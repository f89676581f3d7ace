#pragma once

// Moments of the arc length s over [a, b].
//
// One output, the graph length s = int sqrt(1 + f'^2) dt: prior mean in closed
// form and posterior mean by quadrature of the exact integrand mean. Several
// outputs, s = int |f'| dt: means and second moments under the Nakagami
// approximation of |f'|.

#include "gparc/gp.hpp"
#include "gparc/kernels.hpp"
#include "gparc/quadrature.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gparc::arclength {

struct Interval {
    double a = 0.0;
    double b = 1.0;

    double length() const { return b - a; }
    /// Throws InputError unless a < b and both are finite.
    void validate() const;
};

enum class MeanForm { UForm, BesselForm };
enum class Method { ClosedForm, SeriesPlusQuadrature, MonteCarloFallback };

/// Correlation used by the posterior second moment. PriorStationary plugs in
/// the prior derivative correlation at |t1 - t2|; PosteriorNormalized uses the
/// correlation of the two squared norms under the posterior, clamped to [0, 1].
enum class CorrelationPolicy { PriorStationary, PosteriorNormalized };

struct SeriesPolicy {
    double rel_tol = 1e-10;
    std::size_t max_terms = 60;
    CorrelationPolicy correlation = CorrelationPolicy::PriorStationary;
};

struct Diagnostics {
    double quadrature_error = 0.0;
    bool quadrature_converged = true;
    std::size_t quadrature_nodes = 0;
    std::size_t series_terms = 0;
    bool series_converged = true;
    /// Upper bound on the omitted series tail (prior second moment only).
    std::optional<double> series_tail_bound;
    /// Second moment with (m_2)_n replaced by the average of (m_1)_n and (m_2)_n,
    /// minus the literal value.
    std::optional<double> symmetrization_difference;
    bool variance_clamped = false;
    int predictive_clamps = 0;         // negative derivative variances raised to 0
    std::size_t deterministic_points = 0;  // nodes where the integrand had zero spread
    std::size_t integrand_fallbacks = 0;   // 1-D nodes evaluated by quadrature
    std::optional<double> min_shape;       // smallest Nakagami m over the nodes
    bool shape_below_half = false;
    std::vector<std::string> notes;
};

struct ArcLengthMoments {
    double mean = 0.0;
    std::optional<double> second_moment;
    std::optional<double> variance;
    Method method = Method::ClosedForm;
    Diagnostics diagnostics;
};

struct MomentEstimate {
    double value = 0.0;
    Diagnostics diagnostics;
};

inline constexpr const char* kOneDimVarianceNote = "analytic-1d-variance-out-of-scope";

/// E[s] for a stationary scalar prior:
///   UForm      T Gamma(1/2) U(1/2, 2, 1/(2 s^2)) / (sqrt(2 pi) s)
///   BesselForm T e^z (K0(z) + K1(z)) / (2 sqrt(2 pi) s),  z = 1/(4 s^2)
/// with s^2 the derivative variance.
double prior_mean_1d(const kernels::KernelSpec& k, const Interval& iv,
                     MeanForm form = MeanForm::UForm);

/// Prior mean with the variance left absent (noted in diagnostics).
ArcLengthMoments prior_moments_1d(const kernels::KernelSpec& k, const Interval& iv);

/// Quadrature over t of E[sqrt(1 + f'(t)^2)] under the posterior. Panels are
/// split at observation inputs inside the interval.
ArcLengthMoments posterior_mean_1d(const gp::GpPosterior& gp, const Interval& iv,
                                   const quadrature::QuadratureSpec& quad = {});

/// T E[W] with W ~ Nakagami fitted to f' ~ N(0, B s^2).
double prior_mean_nd(const kernels::CoregionalizedKernel& ck, const Interval& iv);

/// E[s^2] from the 2F1 power series in the derivative correlation; each
/// double integral is reduced to 2 int_0^T (T - tau) rho(tau)^n dtau.
MomentEstimate prior_second_moment_nd(const kernels::CoregionalizedKernel& ck,
                                      const Interval& iv,
                                      const quadrature::QuadratureSpec& quad = {},
                                      const SeriesPolicy& series = {});

/// E[s^2] - E[s]^2, clamped at 0.
double prior_variance_nd(const kernels::CoregionalizedKernel& ck, const Interval& iv,
                         const quadrature::QuadratureSpec& quad = {},
                         const SeriesPolicy& series = {});

ArcLengthMoments prior_moments_nd(const kernels::CoregionalizedKernel& ck, const Interval& iv,
                                  const quadrature::QuadratureSpec& quad = {},
                                  const SeriesPolicy& series = {});

/// Quadrature over t of the Nakagami mean fitted to the posterior of f'(t).
ArcLengthMoments posterior_mean_nd(const gp::GpPosterior& gp, const Interval& iv,
                                   const quadrature::QuadratureSpec& quad = {});

/// Series over n of the tensor-product quadrature of
///   sqrt(O1/m1) sqrt(O2/m2) G(m1) G(m2) (-1/2)_n^2 / ((m2)_n n!) rho^n,
/// G(m) = Gamma(m+1/2)/Gamma(m), with per-point Nakagami parameters.
MomentEstimate posterior_second_moment_nd(const gp::GpPosterior& gp, const Interval& iv,
                                          const quadrature::QuadratureSpec& quad = {},
                                          const SeriesPolicy& series = {});

ArcLengthMoments posterior_moments_nd(const gp::GpPosterior& gp, const Interval& iv,
                                      const quadrature::QuadratureSpec& quad = {},
                                      const SeriesPolicy& series = {});

}  // namespace gparc::arclength
