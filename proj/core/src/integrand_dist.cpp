#include "gparc/integrand_dist.hpp"

#include "gparc/error.hpp"
#include "gparc/quadrature.hpp"
#include "gparc/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace gparc::integrand {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// sqrt(y^2 - 1) without cancellation near y = 1.
double half_chord(double y) { return std::sqrt((y - 1.0) * (y + 1.0)); }

// Upper standard normal tail.
double normal_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

Mean1D mean_by_quadrature(const Integrand1D& d) {
    // E[sqrt(1+X^2)] over mu +- 12 sigma in eight panels; equal to
    // int y pdf_1d(y) dy after the substitution y = sqrt(1+x^2).
    std::vector<double> breaks;
    for (int k = -12; k <= 12; k += 3) breaks.push_back(d.mu + k * d.sigma);
    auto integrand = [&](double x) {
        const double z = (x - d.mu) / d.sigma;
        return std::hypot(1.0, x) * std::exp(-0.5 * z * z) / (d.sigma * std::sqrt(2.0 * std::numbers::pi));
    };
    quadrature::QuadratureSpec spec;
    spec.nodes_per_axis = 64;
    spec.refinements = 3;
    spec.abs_tol = 1e-300;
    spec.rel_tol = 1e-13;
    const auto r = quadrature::integrate_1d_piecewise(integrand, breaks, spec);
    Mean1D out;
    out.value = r.value;
    out.method = MeanMethod::Quadrature;
    out.quadrature_error = r.error_estimate;
    return out;
}

void check_symmetric(const Eigen::MatrixXd& sigma, const char* what) {
    if (sigma.rows() != sigma.cols()) throw InputError(std::string(what) + ": matrix must be square");
    if (sigma.rows() > 0 && (sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw InputError(std::string(what) + ": covariance is not symmetric");
    }
}

// Symmetric square root for a PSD matrix (negative round-off clipped).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sigma) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           eig.eigenvectors().transpose();
}

}  // namespace

void Integrand1D::validate() const {
    if (!std::isfinite(mu)) throw InputError("integrand: mu must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("integrand: sigma must be positive");
}

void NakagamiParams::validate() const {
    if (!(m > 0.0) || !std::isfinite(m)) throw InputError("nakagami: m must be positive");
    if (!(omega > 0.0) || !std::isfinite(omega)) throw InputError("nakagami: omega must be positive");
}

double pdf_1d(const Integrand1D& d, double y) {
    d.validate();
    if (!(y > 1.0)) return 0.0;
    const double v = half_chord(y);
    const double s2 = 2.0 * d.sigma * d.sigma;
    const double plus = std::exp(-(v + d.mu) * (v + d.mu) / s2);
    const double minus = std::exp(-(v - d.mu) * (v - d.mu) / s2);
    return (plus + minus) / (std::sqrt(2.0 * std::numbers::pi) * d.sigma) * y / v;
}

double cdf_1d(const Integrand1D& d, double y) {
    d.validate();
    if (!(y > 1.0)) return 0.0;
    const double v = half_chord(y);
    // P(|X| <= v) = 1 - P(X > v) - P(X < -v)
    const double upper = normal_tail((v - d.mu) / d.sigma);
    const double lower = normal_tail((v + d.mu) / d.sigma);
    return std::clamp(1.0 - upper - lower, 0.0, 1.0);
}

Mean1D mean_1d(const Integrand1D& d, const specfun::SeriesPolicy& policy) {
    d.validate();
    const double var = d.sigma * d.sigma;
    const double ratio = std::abs(d.mu) / var;
    const double poisson_centre = d.mu * d.mu / (2.0 * var);

    specfun::SeriesResult series;
    if (ratio > 30.0 || poisson_centre > 0.8 * static_cast<double>(policy.max_terms)) {
        return mean_by_quadrature(d);
    }

    const double z = 1.0 / (2.0 * var);
    const double log_prefactor = -poisson_centre - kLogSqrt2Pi - std::log(d.sigma);
    double log_sum = specfun::log_gamma(0.5) + specfun::log_hyp_u(0.5, 2.0, z);
    series.terms_used = 1;
    if (d.mu == 0.0) {
        series.converged = true;
    } else {
        const double log_ratio_sq = 2.0 * std::log(ratio);
        const double log_tol = std::log(policy.rel_tol);
        double previous = log_sum;
        for (std::size_t l = 1; l < policy.max_terms; ++l) {
            const double dl = static_cast<double>(l);
            const double log_term = specfun::log_gamma(dl + 0.5) - specfun::log_gamma(2.0 * dl + 1.0) +
                                    dl * log_ratio_sq + specfun::log_hyp_u(dl + 0.5, dl + 2.0, z);
            if (log_term < previous && log_term < log_tol + log_sum) {
                series.converged = true;
                series.last_term = std::exp(log_prefactor + log_term);
                break;
            }
            log_sum = log_add(log_sum, log_term);
            previous = log_term;
            ++series.terms_used;
        }
    }
    series.value = std::exp(log_prefactor + log_sum);
    if (!series.converged) {
        Mean1D out = mean_by_quadrature(d);
        out.series = series;
        return out;
    }
    Mean1D out;
    out.value = series.value;
    out.method = MeanMethod::Series;
    out.series = series;
    return out;
}

QuadraticFormMoments quadratic_form_moments(const Eigen::VectorXd& mu,
                                            const Eigen::MatrixXd& sigma) {
    check_symmetric(sigma, "quadratic_form_moments");
    if (mu.size() != sigma.rows()) throw InputError("quadratic_form_moments: dimension mismatch");
    QuadraticFormMoments out;
    out.mean = sigma.trace() + mu.squaredNorm();
    out.variance = 2.0 * sigma.squaredNorm() + 4.0 * mu.dot(sigma * mu);
    return out;
}

GammaParams fit_gamma(double mean, double variance) {
    if (!(mean > 0.0) || !(variance > 0.0)) {
        throw InputError("fit_gamma: mean and variance must be positive");
    }
    return {mean * mean / variance, variance / mean};
}

NakagamiParams gamma_to_nakagami(const GammaParams& g) {
    return {g.shape, g.shape * g.scale};
}

NakagamiParams nakagami_from_normal(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
    const QuadraticFormMoments q = quadratic_form_moments(mu, sigma);
    if (!(q.variance > 0.0)) {
        throw InputError("nakagami_from_normal: degenerate covariance (x^T x has zero variance)");
    }
    return gamma_to_nakagami(fit_gamma(q.mean, q.variance));
}

double nakagami_pdf(const NakagamiParams& p, double x) {
    p.validate();
    if (x < 0.0) return 0.0;
    if (x == 0.0) {
        if (p.m > 0.5) return 0.0;
        if (p.m < 0.5) return std::numeric_limits<double>::infinity();
    }
    const double log_norm = std::log(2.0) + p.m * std::log(p.m) - specfun::log_gamma(p.m) -
                            p.m * std::log(p.omega);
    const double log_body = x == 0.0 ? 0.0 : (2.0 * p.m - 1.0) * std::log(x);
    return std::exp(log_norm + log_body - p.m / p.omega * x * x);
}

double nakagami_mean(const NakagamiParams& p) {
    p.validate();
    return std::exp(specfun::log_gamma_ratio(p.m, 0.5)) * std::sqrt(p.omega / p.m);
}

NakagamiMoments nakagami_moments(const NakagamiParams& p) {
    p.validate();
    const double log_ratio = specfun::log_gamma_ratio(p.m, 0.5);
    NakagamiMoments out;
    out.mean = std::exp(log_ratio) * std::sqrt(p.omega / p.m);
    // Omega (1 - ratio^2/m), without cancellation for large m.
    out.variance = -p.omega * std::expm1(2.0 * log_ratio - std::log(p.m));
    return out;
}

double nakagami_mixed_moment(const NakagamiParams& p, double rho) {
    p.validate();
    if (!(rho >= 0.0 && rho <= 1.0)) throw InputError("nakagami_mixed_moment: rho must lie in [0, 1]");
    if (rho == 1.0) return p.omega;
    const double prefactor = p.omega / p.m * std::exp(2.0 * specfun::log_gamma_ratio(p.m, 0.5));
    const specfun::SeriesResult f =
        specfun::hyp_2f1_series(-0.5, -0.5, p.m, rho, {1e-15, 5'000'000});
    if (!f.converged) {
        throw NumericalError("nakagami_mixed_moment: 2F1 series did not converge at rho=" +
                             std::to_string(rho));
    }
    return prefactor * f.value;
}

std::vector<double> quadratic_form_sample_oracle(const Eigen::VectorXd& mu,
                                                 const Eigen::MatrixXd& sigma,
                                                 const Eigen::MatrixXd& a, std::size_t count,
                                                 std::uint64_t seed, QuadraticFormSampling form) {
    check_symmetric(sigma, "quadratic_form_sample_oracle");
    check_symmetric(a, "quadratic_form_sample_oracle");
    const Eigen::Index n = mu.size();
    if (sigma.rows() != n || a.rows() != n) {
        throw InputError("quadratic_form_sample_oracle: dimension mismatch");
    }

    random::PhiloxStream stream(seed, 0);
    std::vector<double> out(count);
    Eigen::VectorXd z(n);
    if (form == QuadraticFormSampling::Direct) {
        const Eigen::MatrixXd root = psd_sqrt(sigma);
        for (std::size_t s = 0; s < count; ++s) {
            for (Eigen::Index i = 0; i < n; ++i) z(i) = stream.normal();
            const Eigen::VectorXd x = mu + root * z;
            out[s] = x.dot(a * x);
        }
        return out;
    }

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sig_eig(sigma);
    if (sig_eig.eigenvalues().minCoeff() <= 0.0) {
        throw InputError("quadratic_form_sample_oracle: eigenexpansion needs Sigma positive definite");
    }
    const Eigen::MatrixXd& v = sig_eig.eigenvectors();
    const Eigen::VectorXd sqrt_eig = sig_eig.eigenvalues().cwiseSqrt();
    const Eigen::MatrixXd root = v * sqrt_eig.asDiagonal() * v.transpose();
    const Eigen::MatrixXd inv_root = v * sqrt_eig.cwiseInverse().asDiagonal() * v.transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> form_eig(root * a * root);
    const Eigen::VectorXd& lambda = form_eig.eigenvalues();
    const Eigen::VectorXd b = form_eig.eigenvectors().transpose() * (inv_root * mu);
    for (std::size_t s = 0; s < count; ++s) {
        double q = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double shifted = stream.normal() + b(i);
            q += lambda(i) * shifted * shifted;
        }
        out[s] = q;
    }
    return out;
}

}  // namespace gparc::integrand
