#pragma once

// Special functions needed by the arc-length formulas. All functions are pure.

#include <cstddef>

namespace gparc::specfun {

/// Partial sum of a power series together with its truncation bookkeeping.
struct SeriesResult {
    double value = 0.0;
    std::size_t terms_used = 0;
    bool converged = false;
    /// Magnitude of the first term that was not added (or the last term added
    /// when the series stopped on max_terms).
    double last_term = 0.0;
};

struct SeriesPolicy {
    double rel_tol = 1e-12;
    std::size_t max_terms = 500;
};

/// Gamma function for x > 0. Throws std::domain_error for x <= 0 and
/// std::overflow_error when the result is not representable.
double gamma_fn(double x);

/// log Gamma(x) for x > 0. Reentrant.
double log_gamma(double x);

/// log( Gamma(x + delta) / Gamma(x) ), accurate for large x.
double log_gamma_ratio(double x, double delta);

/// Rising factorial (q)_n = q (q+1) ... (q+n-1), (q)_0 = 1.
double pochhammer(double q, std::size_t n);

/// Confluent hypergeometric function of the second kind,
///   U(a,b,z) = 1/Gamma(a) * int_0^inf exp(-z t) t^(a-1) (1+t)^(b-a-1) dt,
/// for a > 0, z > 0.
double hyp_u(double a, double b, double z);

/// log U(a,b,z); finite where U itself would under- or overflow.
double log_hyp_u(double a, double b, double z);

/// Modified Bessel function of the second kind, order 0 or 1, z > 0.
double bessel_k(int order, double z);

/// exp(z) * K_order(z). Finite for all z > 0.
double bessel_k_scaled(int order, double z);

/// Gauss hypergeometric series 2F1(a,b;c;z) summed term by term, c > 0,
/// 0 <= z < 1. Terms are added until |term| < rel_tol * |sum|.
SeriesResult hyp_2f1_series(double a, double b, double c, double z,
                            const SeriesPolicy& policy = {});

/// 2F1(a,b;c;1) by Gauss's summation theorem; requires c - a - b > 0.
double hyp_2f1_at_one(double a, double b, double c);

/// Standard normal cumulative distribution function.
double std_normal_cdf(double x);

/// Standard normal density.
double std_normal_pdf(double x);

}  // namespace gparc::specfun
