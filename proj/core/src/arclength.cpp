#include "gparc/arclength.hpp"

#include "gparc/error.hpp"
#include "gparc/integrand_dist.hpp"
#include "gparc/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace gparc::arclength {

namespace {

using kernels::CoregionalizedKernel;
using kernels::KernelSpec;
using quadrature::QuadratureSpec;

constexpr double kInf = std::numeric_limits<double>::infinity();

// V[Q] below this fraction of E[Q]^2 is treated as a point mass.
constexpr double kDegenerateSpread = 1e-14;

// Nakagami law of |x| at one node. m = inf marks a deterministic norm.
struct NodeLaw {
    double mean = 0.0;   // E[W]
    double m = kInf;
    double q_var = 0.0;  // V[Q]
};

NodeLaw node_law(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, Diagnostics& diag) {
    const integrand::QuadraticFormMoments q = integrand::quadratic_form_moments(mu, cov);
    NodeLaw law;
    law.q_var = std::max(q.variance, 0.0);
    if (!(q.mean > 0.0)) {
        ++diag.deterministic_points;
        return law;
    }
    if (law.q_var <= kDegenerateSpread * q.mean * q.mean) {
        ++diag.deterministic_points;
        law.mean = std::sqrt(q.mean);
        return law;
    }
    const integrand::NakagamiParams p =
        integrand::gamma_to_nakagami(integrand::fit_gamma(q.mean, law.q_var));
    law.m = p.m;
    law.mean = integrand::nakagami_mean(p);
    diag.min_shape = diag.min_shape ? std::min(*diag.min_shape, p.m) : p.m;
    if (p.below_classical_range()) diag.shape_below_half = true;
    return law;
}

// Interval ends plus observation inputs strictly inside.
std::vector<double> panel_breaks(const gp::GpPosterior& gp, const Interval& iv) {
    std::vector<double> breaks{iv.a};
    const double guard = 1e-9 * iv.length();
    for (double t : gp.inputs()) {
        if (t > iv.a + guard && t < iv.b - guard) breaks.push_back(t);
    }
    breaks.push_back(iv.b);
    return breaks;
}

void record(Diagnostics& diag, const quadrature::QuadratureResult& r) {
    diag.quadrature_error = r.error_estimate;
    diag.quadrature_converged = r.converged;
    diag.quadrature_nodes = r.nodes_used;
}

// Refinement driver that keeps the diagnostics of the rule whose value is
// returned.
template <typename Eval>
std::pair<quadrature::QuadratureResult, Diagnostics> refine_with(const QuadratureSpec& quad,
                                                                 Eval&& eval) {
    std::map<std::size_t, Diagnostics> per_rule;
    const quadrature::QuadratureResult r = quadrature::refine(
        [&](std::size_t n) {
            Diagnostics d;
            const double v = eval(n, d);
            per_rule[n] = std::move(d);
            return v;
        },
        quad);
    Diagnostics diag = std::move(per_rule[r.nodes_used]);
    record(diag, r);
    return {r, std::move(diag)};
}

// ((-1/2)_n)^2 / n! recurrence factor.
double half_pochhammer_step(std::size_t n) {
    const double dn = static_cast<double>(n);
    return (dn - 1.5) * (dn - 1.5) / dn;
}

double derivative_sd(const KernelSpec& k) {
    const double var = kernels::derivative_variance(k);
    if (!(var > 0.0)) throw InputError("arc length: derivative variance must be positive");
    return std::sqrt(var);
}

integrand::NakagamiParams prior_law(const CoregionalizedKernel& ck) {
    const double var = kernels::derivative_variance(ck.scalar());
    const Eigen::MatrixXd sigma = ck.mixing() * var;
    if (!(sigma.trace() > 0.0)) {
        throw InputError("arc length: zero derivative variance (B or kernel scale is zero)");
    }
    return integrand::nakagami_from_normal(Eigen::VectorXd::Zero(sigma.rows()), sigma);
}

}  // namespace

void Interval::validate() const {
    if (!std::isfinite(a) || !std::isfinite(b)) throw InputError("interval: ends must be finite");
    if (!(b > a)) throw InputError("interval: need b > a");
}

double prior_mean_1d(const KernelSpec& k, const Interval& iv, MeanForm form) {
    iv.validate();
    k.validate();
    const double s = derivative_sd(k);
    const double root_two_pi = std::sqrt(2.0 * std::numbers::pi);
    if (form == MeanForm::UForm) {
        const double log_u = specfun::log_hyp_u(0.5, 2.0, 1.0 / (2.0 * s * s));
        return iv.length() * std::exp(specfun::log_gamma(0.5) + log_u) / (root_two_pi * s);
    }
    const double z = 1.0 / (4.0 * s * s);
    const double bessel = specfun::bessel_k_scaled(0, z) + specfun::bessel_k_scaled(1, z);
    return iv.length() * bessel / (2.0 * root_two_pi * s);
}

ArcLengthMoments prior_moments_1d(const KernelSpec& k, const Interval& iv) {
    ArcLengthMoments out;
    out.mean = prior_mean_1d(k, iv);
    out.method = Method::ClosedForm;
    out.diagnostics.notes.emplace_back(kOneDimVarianceNote);
    return out;
}

ArcLengthMoments posterior_mean_1d(const gp::GpPosterior& gp, const Interval& iv,
                                   const QuadratureSpec& quad) {
    iv.validate();
    if (gp.output_dim() != 1) {
        throw InputError("posterior_mean_1d: needs a scalar GP, got D=" +
                         std::to_string(gp.output_dim()));
    }
    const std::vector<double> breaks = panel_breaks(gp, iv);
    auto eval = [&](std::size_t n, Diagnostics& diag) {
        const quadrature::MappedRule rule = quadrature::mapped_rule(breaks, n);
        const std::vector<gp::PointDerivative> pts = gp.derivative_grid(rule.nodes);
        double total = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            diag.predictive_clamps += pts[i].clamped;
            const double mu = pts[i].mean(0);
            const double var = pts[i].cov(0, 0);
            double value = 0.0;
            if (!(var > 0.0)) {
                ++diag.deterministic_points;
                value = std::hypot(1.0, mu);
            } else {
                const integrand::Mean1D m = integrand::mean_1d({mu, std::sqrt(var)});
                if (m.method == integrand::MeanMethod::Quadrature) ++diag.integrand_fallbacks;
                value = m.value;
            }
            total += rule.weights[i] * value;
        }
        return total;
    };
    auto [r, diag] = refine_with(quad, eval);
    ArcLengthMoments out;
    out.mean = r.value;
    out.method = Method::SeriesPlusQuadrature;
    out.diagnostics = std::move(diag);
    out.diagnostics.notes.emplace_back(kOneDimVarianceNote);
    return out;
}

double prior_mean_nd(const CoregionalizedKernel& ck, const Interval& iv) {
    iv.validate();
    return iv.length() * integrand::nakagami_mean(prior_law(ck));
}

MomentEstimate prior_second_moment_nd(const CoregionalizedKernel& ck, const Interval& iv,
                                      const QuadratureSpec& quad, const SeriesPolicy& series) {
    iv.validate();
    const integrand::NakagamiParams p = prior_law(ck);
    const double prefactor = p.omega / p.m * std::exp(2.0 * specfun::log_gamma_ratio(p.m, 0.5));
    const double total = specfun::hyp_2f1_at_one(-0.5, -0.5, p.m);
    const double span = iv.length();
    const KernelSpec& k = ck.scalar();

    auto eval = [&](std::size_t n, Diagnostics& diag) {
        const quadrature::MappedRule rule = quadrature::mapped_rule(0.0, span, n);
        const std::size_t count = rule.nodes.size();
        std::vector<double> weight(count);
        std::vector<double> rho(count);
        std::vector<double> power(count);
        for (std::size_t i = 0; i < count; ++i) {
            weight[i] = 2.0 * rule.weights[i] * (span - rule.nodes[i]);
            rho[i] = kernels::derivative_correlation(k, rule.nodes[i]);
            power[i] = weight[i];
        }
        // n = 0: the reduced integral of 1 over [0,T]^2 is T^2.
        double sum = 0.0;
        for (double w : weight) sum += w;
        double coef = 1.0;
        double coef_sum = 1.0;
        double last_integral = sum;
        diag.series_terms = 1;
        diag.series_converged = false;
        for (std::size_t term = 1; term < series.max_terms; ++term) {
            coef *= half_pochhammer_step(term) / (p.m + static_cast<double>(term) - 1.0);
            double integral = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                power[i] *= rho[i];
                integral += power[i];
            }
            const double contribution = coef * integral;
            sum += contribution;
            coef_sum += coef;
            last_integral = integral;
            ++diag.series_terms;
            if (contribution < series.rel_tol * sum) {
                diag.series_converged = true;
                break;
            }
        }
        // Terms are nonnegative and the integrals nonincreasing in n.
        diag.series_tail_bound = prefactor * last_integral * std::max(total - coef_sum, 0.0);
        return prefactor * sum;
    };
    auto [r, diag] = refine_with(quad, eval);
    if (!diag.series_converged) {
        diag.notes.emplace_back("series stopped at max_terms; see series_tail_bound");
    }
    return {r.value, std::move(diag)};
}

ArcLengthMoments prior_moments_nd(const CoregionalizedKernel& ck, const Interval& iv,
                                  const QuadratureSpec& quad, const SeriesPolicy& series) {
    ArcLengthMoments out;
    out.mean = prior_mean_nd(ck, iv);
    MomentEstimate second = prior_second_moment_nd(ck, iv, quad, series);
    out.second_moment = second.value;
    out.diagnostics = std::move(second.diagnostics);
    double variance = second.value - out.mean * out.mean;
    if (variance < 0.0) {
        out.diagnostics.variance_clamped = true;
        variance = 0.0;
    }
    out.variance = variance;
    out.method = Method::SeriesPlusQuadrature;
    return out;
}

double prior_variance_nd(const CoregionalizedKernel& ck, const Interval& iv,
                         const QuadratureSpec& quad, const SeriesPolicy& series) {
    return *prior_moments_nd(ck, iv, quad, series).variance;
}

ArcLengthMoments posterior_mean_nd(const gp::GpPosterior& gp, const Interval& iv,
                                   const QuadratureSpec& quad) {
    iv.validate();
    const std::vector<double> breaks = panel_breaks(gp, iv);
    auto eval = [&](std::size_t n, Diagnostics& diag) {
        const quadrature::MappedRule rule = quadrature::mapped_rule(breaks, n);
        const std::vector<gp::PointDerivative> pts = gp.derivative_grid(rule.nodes);
        double total = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            diag.predictive_clamps += pts[i].clamped;
            total += rule.weights[i] * node_law(pts[i].mean, pts[i].cov, diag).mean;
        }
        return total;
    };
    auto [r, diag] = refine_with(quad, eval);
    ArcLengthMoments out;
    out.mean = r.value;
    out.method = Method::SeriesPlusQuadrature;
    out.diagnostics = std::move(diag);
    return out;
}

MomentEstimate posterior_second_moment_nd(const gp::GpPosterior& gp, const Interval& iv,
                                          const QuadratureSpec& quad, const SeriesPolicy& series) {
    iv.validate();
    const KernelSpec& k = gp.kernel().scalar();
    const Eigen::Index d = gp.output_dim();
    const bool normalized = series.correlation == CorrelationPolicy::PosteriorNormalized;

    // The literal integrand F(t1,t2) carries (m(t2))_n; over the square it
    // integrates to the same value as its symmetrization. Fold the square onto
    // the triangle t2 < t1, where the correlation is smooth, and integrate
    // F(t1,t2) + F(t2,t1) with a collapsed Gauss rule.
    auto eval = [&](std::size_t n, Diagnostics& diag) {
        const quadrature::MappedRule outer = quadrature::mapped_rule(iv.a, iv.b, n);
        const std::vector<gp::PointDerivative> outer_pts = gp.derivative_grid(outer.nodes);

        std::vector<double> coef;   // weight * E[W1] * E[W2]
        std::vector<double> rho;
        std::vector<double> shape1;
        std::vector<double> shape2;
        const std::size_t pairs = n * n;
        coef.reserve(pairs);
        rho.reserve(pairs);
        shape1.reserve(pairs);
        shape2.reserve(pairs);

        std::vector<NodeLaw> outer_law;
        for (const auto& p : outer_pts) {
            diag.predictive_clamps += p.clamped;
            outer_law.push_back(node_law(p.mean, p.cov, diag));
        }

        for (std::size_t i = 0; i < n; ++i) {
            const double t1 = outer.nodes[i];
            const quadrature::MappedRule inner = quadrature::mapped_rule(iv.a, t1, n);
            const std::vector<gp::PointDerivative> inner_pts = gp.derivative_grid(inner.nodes);
            Eigen::MatrixXd cross;
            if (normalized) {
                const double one[] = {t1};
                cross = gp.deriv_cross_cov(one, inner.nodes);
            }
            const NodeLaw& a = outer_law[i];
            for (std::size_t j = 0; j < n; ++j) {
                Diagnostics scratch;
                const NodeLaw b = node_law(inner_pts[j].mean, inner_pts[j].cov, scratch);
                double r = 0.0;
                if (!normalized) {
                    r = kernels::derivative_correlation(k, t1 - inner.nodes[j]);
                } else if (a.q_var > 0.0 && b.q_var > 0.0) {
                    double frob = 0.0;
                    double lin = 0.0;
                    const Eigen::VectorXd& mu1 = outer_pts[i].mean;
                    const Eigen::VectorXd& mu2 = inner_pts[j].mean;
                    for (Eigen::Index p = 0; p < d; ++p) {
                        for (Eigen::Index q = 0; q < d; ++q) {
                            const double c = cross(p, q * static_cast<Eigen::Index>(n) +
                                                          static_cast<Eigen::Index>(j));
                            frob += c * c;
                            lin += mu1(p) * c * mu2(q);
                        }
                    }
                    r = std::clamp((2.0 * frob + 4.0 * lin) / std::sqrt(a.q_var * b.q_var), 0.0,
                                   1.0);
                }
                coef.push_back(outer.weights[i] * inner.weights[j] * a.mean * b.mean);
                rho.push_back(r);
                shape1.push_back(a.m);
                shape2.push_back(b.m);
            }
        }

        // n = 0 term, then the series with 1/(m1)_n and 1/(m2)_n carried along.
        const std::size_t count = coef.size();
        std::vector<double> power(coef);
        std::vector<double> inv1(count, 1.0);
        std::vector<double> inv2(count, 1.0);
        double literal = 0.0;
        for (double c : coef) literal += 2.0 * c;
        double symmetric = literal;
        double factor = 1.0;
        diag.series_terms = 1;
        diag.series_converged = false;
        for (std::size_t term = 1; term < series.max_terms; ++term) {
            factor *= half_pochhammer_step(term);
            const double shift = static_cast<double>(term) - 1.0;
            double lit = 0.0;
            double sym = 0.0;
            for (std::size_t idx = 0; idx < count; ++idx) {
                power[idx] *= rho[idx];
                inv1[idx] /= shape1[idx] + shift;
                inv2[idx] /= shape2[idx] + shift;
                // F(t1,t2) + F(t2,t1)
                lit += power[idx] * inv2[idx] + power[idx] * inv1[idx];
                sym += power[idx] * (inv1[idx] + inv2[idx]);
            }
            const double contribution = factor * lit;
            literal += contribution;
            symmetric += factor * sym;
            ++diag.series_terms;
            if (std::abs(contribution) < series.rel_tol * std::abs(literal)) {
                diag.series_converged = true;
                break;
            }
        }
        diag.symmetrization_difference = symmetric - literal;
        return literal;
    };
    auto [r, diag] = refine_with(quad, eval);
    if (!diag.series_converged) {
        diag.notes.emplace_back("series stopped at max_terms");
    }
    if (normalized) diag.notes.emplace_back("correlation: posterior-normalized");
    return {r.value, std::move(diag)};
}

ArcLengthMoments posterior_moments_nd(const gp::GpPosterior& gp, const Interval& iv,
                                      const QuadratureSpec& quad, const SeriesPolicy& series) {
    ArcLengthMoments out = posterior_mean_nd(gp, iv, quad);
    MomentEstimate second = posterior_second_moment_nd(gp, iv, quad, series);
    Diagnostics& diag = out.diagnostics;
    const Diagnostics& sd = second.diagnostics;
    diag.series_terms = sd.series_terms;
    diag.series_converged = sd.series_converged;
    diag.symmetrization_difference = sd.symmetrization_difference;
    diag.quadrature_error = std::max(diag.quadrature_error, sd.quadrature_error);
    diag.quadrature_converged = diag.quadrature_converged && sd.quadrature_converged;
    diag.notes.insert(diag.notes.end(), sd.notes.begin(), sd.notes.end());

    out.second_moment = second.value;
    double variance = second.value - out.mean * out.mean;
    if (variance < 0.0) {
        diag.variance_clamped = true;
        variance = 0.0;
    }
    out.variance = variance;
    return out;
}

}  // namespace gparc::arclength
