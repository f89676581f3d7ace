#pragma once

// Gauss-Legendre quadrature on finite intervals and boxes, with an error
// estimate taken from the difference between successive node doublings.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace gparc::quadrature {

struct QuadratureSpec {
    std::size_t nodes_per_axis = 128;
    std::size_t refinements = 1;
    double abs_tol = 1e-8;
    double rel_tol = 1e-8;

    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
    std::size_t nodes_used = 0;  // per axis, of the rule that produced value
};

/// n-point Gauss-Legendre rule on [-1, 1]. Nodes ascend; the table is built
/// once per n and shared.
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

std::shared_ptr<const GaussLegendreRule> gauss_legendre(std::size_t n);

/// Nodes and weights of a rule mapped onto one or more consecutive panels.
struct MappedRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// The n-point rule applied on each panel [breaks[i], breaks[i+1]].
MappedRule mapped_rule(std::span<const double> breaks, std::size_t n);

/// The n-point rule on [a, b].
MappedRule mapped_rule(double a, double b, std::size_t n);

using Function1D = std::function<double(double)>;
using Function2D = std::function<double(double, double)>;

struct Box {
    double x0;
    double x1;
    double y0;
    double y1;
};

/// Integrates f over [a, b]. The rule is doubled up to spec.refinements times
/// until two successive estimates agree to the tolerances; with zero
/// refinements the estimate is compared against the half-size rule.
/// Non-convergence is reported in the result, not thrown.
QuadratureResult integrate_1d(const Function1D& f, double a, double b,
                              const QuadratureSpec& spec = {});

/// As integrate_1d, applying the rule on every panel between consecutive
/// breakpoints (sorted, at least two).
QuadratureResult integrate_1d_piecewise(const Function1D& f, std::span<const double> breaks,
                                        const QuadratureSpec& spec = {});

/// Tensor-product rule over a box with the same refinement policy.
QuadratureResult integrate_2d(const Function2D& f, const Box& box,
                              const QuadratureSpec& spec = {});

/// Shared refinement driver: `eval(n)` returns the estimate with n nodes per
/// axis (per panel). Used by callers that reuse node tables across many
/// integrands.
QuadratureResult refine(const std::function<double(std::size_t)>& eval,
                        const QuadratureSpec& spec);

}  // namespace gparc::quadrature
