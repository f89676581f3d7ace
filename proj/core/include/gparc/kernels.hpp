#pragma once

// Stationary scalar kernels k(tau), tau = t - t', their derivative processes,
// and the separable vector kernel B (x) k.

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>

namespace gparc::kernels {

enum class KernelFamily { SquaredExponential, Matern32, Matern52, RationalQuadratic };

/// Short config name: "se", "m32", "m52", "rq".
std::string_view family_name(KernelFamily family);
KernelFamily parse_family(std::string_view name);

struct KernelSpec {
    KernelFamily family = KernelFamily::SquaredExponential;
    double signal_variance = 1.0;  // lambda^2
    double length_scale = 1.0;     // sigma
    double rq_shape = 1.0;         // alpha, RationalQuadratic only

    void validate() const;
};

/// k(tau); k(0) equals the signal variance.
double eval(const KernelSpec& k, double tau);

/// dk/dtau. The derivative of k(t - x) with respect to t.
double first_derivative(const KernelSpec& k, double tau);

/// -d^2k/dtau^2, i.e. d^2 k(t - t') / dt dt'. The covariance function of the
/// derivative process.
double cross_derivative(const KernelSpec& k, double tau);

/// Variance of the derivative process, cross_derivative(k, 0):
///   SE lambda^2/sigma^2, Matern-3/2 3 lambda^2/sigma^2,
///   Matern-5/2 5 lambda^2/(3 sigma^2), RQ lambda^2/sigma^2.
double derivative_variance(const KernelSpec& k);

/// Squared correlation of the derivative process,
/// cross_derivative(tau)^2 / derivative_variance^2, in [0, 1].
double derivative_correlation(const KernelSpec& k, double tau);

/// Scalar kernel times a symmetric PSD output-mixing matrix B.
class CoregionalizedKernel {
public:
    /// Throws InputError unless B is square, symmetric to 1e-12 and has no
    /// eigenvalue below -1e-10.
    CoregionalizedKernel(KernelSpec scalar, Eigen::MatrixXd mixing);

    /// D = 1, B = [1].
    explicit CoregionalizedKernel(KernelSpec scalar);

    const KernelSpec& scalar() const { return scalar_; }
    const Eigen::MatrixXd& mixing() const { return mixing_; }
    Eigen::Index output_dim() const { return mixing_.rows(); }

private:
    KernelSpec scalar_;
    Eigen::MatrixXd mixing_;
};

/// Scalar Gram matrix K(X, X).
Eigen::MatrixXd scalar_gram(const KernelSpec& k, std::span<const double> inputs);

/// B (x) K(X, X), output index outer: entry (d*N + i, e*N + j) equals
/// B(d, e) k(x_i - x_j).
Eigen::MatrixXd vector_gram(const CoregionalizedKernel& ck, std::span<const double> inputs);

}  // namespace gparc::kernels
