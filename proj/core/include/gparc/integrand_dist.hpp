#pragma once

// Distributions of the arc-length integrand.
//
// One output: Y = sqrt(1 + X^2) with X ~ N(mu, sigma^2), exactly.
// Several outputs: W = |x| with x ~ N(mu, Sigma), approximated by matching
// the first two moments of Q = x^T x with a gamma law, which makes W = sqrt(Q)
// Nakagami(m, Omega).

#include "gparc/specfun.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace gparc::integrand {

struct Integrand1D {
    double mu = 0.0;
    double sigma = 1.0;

    void validate() const;
};

struct GammaParams {
    double shape = 1.0;  // k_G
    double scale = 1.0;  // theta_G
};

struct NakagamiParams {
    double m = 1.0;
    double omega = 1.0;

    /// m < 1/2 lies outside the classical Nakagami family; it is allowed but
    /// callers may want to report it.
    bool below_classical_range() const { return m < 0.5; }
    void validate() const;
};

struct QuadraticFormMoments {
    double mean = 0.0;
    double variance = 0.0;
};

struct NakagamiMoments {
    double mean = 0.0;
    double variance = 0.0;
};

enum class MeanMethod { Series, Quadrature };

struct Mean1D {
    double value = 0.0;
    MeanMethod method = MeanMethod::Series;
    specfun::SeriesResult series;  // bookkeeping of the series attempt, if any
    double quadrature_error = 0.0;
};

/// Density of Y; zero for y <= 1.
double pdf_1d(const Integrand1D& d, double y);

/// P(Y <= y); zero for y <= 1.
double cdf_1d(const Integrand1D& d, double y);

/// E[Y] from the confluent-hypergeometric series
///   exp(-mu^2/2s^2)/(sqrt(2pi) s) sum_l Gamma(l+1/2)/(2l)! (mu/s^2)^(2l) U(l+1/2, l+2, 1/2s^2).
/// Falls back to direct quadrature of E[sqrt(1+X^2)] when |mu|/s^2 > 30, when
/// the Poisson-like term profile needs more than the allowed terms, or when
/// the series fails to converge.
Mean1D mean_1d(const Integrand1D& d, const specfun::SeriesPolicy& policy = {});

/// E[x^T x] = tr(Sigma) + mu^T mu and V[x^T x] = 2 tr(Sigma Sigma) + 4 mu^T Sigma mu.
/// Throws InputError when Sigma is asymmetric beyond 1e-10.
QuadraticFormMoments quadratic_form_moments(const Eigen::VectorXd& mu,
                                            const Eigen::MatrixXd& sigma);

/// Gamma law with the given mean and variance: k = mean^2/var, theta = var/mean.
GammaParams fit_gamma(double mean, double variance);

/// sqrt of Gamma(k, theta) is Nakagami(m = k, Omega = k theta).
NakagamiParams gamma_to_nakagami(const GammaParams& g);

/// Moment-matched Nakagami approximation of |x|, x ~ N(mu, Sigma).
/// Throws InputError when Q has zero variance (Sigma = 0).
NakagamiParams nakagami_from_normal(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma);

double nakagami_pdf(const NakagamiParams& p, double x);

NakagamiMoments nakagami_moments(const NakagamiParams& p);

/// E[W] = Gamma(m+1/2)/Gamma(m) sqrt(Omega/m), evaluated in log space.
double nakagami_mean(const NakagamiParams& p);

/// E[W1 W2] for two Nakagami(m, Omega) variables whose underlying gamma
/// variables have correlation rho in [0, 1]:
///   (Omega/m) [Gamma(m+1/2)/Gamma(m)]^2 2F1(-1/2, -1/2; m; rho).
/// rho = 1 uses Gauss's closed form and returns Omega.
double nakagami_mixed_moment(const NakagamiParams& p, double rho);

enum class QuadraticFormSampling {
    Direct,         // x = mu + Sigma^{1/2} z, Q = x^T A x
    Eigenexpansion  // Q = sum_i lambda_i (U_i + b_i)^2
};

/// Monte Carlo draws of x^T A x for x ~ N(mu, Sigma). The eigenexpansion form
/// uses the eigenpairs (lambda_i, P) of Sigma^{1/2} A Sigma^{1/2} and
/// b = P^T Sigma^{-1/2} mu, so it needs Sigma positive definite.
std::vector<double> quadratic_form_sample_oracle(const Eigen::VectorXd& mu,
                                                 const Eigen::MatrixXd& sigma,
                                                 const Eigen::MatrixXd& a, std::size_t count,
                                                 std::uint64_t seed,
                                                 QuadraticFormSampling form =
                                                     QuadraticFormSampling::Direct);

}  // namespace gparc::integrand
