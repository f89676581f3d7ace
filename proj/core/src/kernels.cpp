#include "gparc/kernels.hpp"

#include "gparc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gparc::kernels {

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;
const double kSqrt5 = std::sqrt(5.0);

}  // namespace

std::string_view family_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::SquaredExponential: return "se";
        case KernelFamily::Matern32: return "m32";
        case KernelFamily::Matern52: return "m52";
        case KernelFamily::RationalQuadratic: return "rq";
    }
    return "unknown";
}

KernelFamily parse_family(std::string_view name) {
    if (name == "se") return KernelFamily::SquaredExponential;
    if (name == "m32") return KernelFamily::Matern32;
    if (name == "m52") return KernelFamily::Matern52;
    if (name == "rq") return KernelFamily::RationalQuadratic;
    throw InputError("unknown kernel family '" + std::string(name) +
                     "' (expected se, m32, m52 or rq)");
}

void KernelSpec::validate() const {
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
        throw InputError("kernel: signal_variance must be positive");
    }
    if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
        throw InputError("kernel: length_scale must be positive");
    }
    if (family == KernelFamily::RationalQuadratic && !(rq_shape > 0.0)) {
        throw InputError("kernel: rq_shape must be positive");
    }
}

double eval(const KernelSpec& k, double tau) {
    const double l2 = k.length_scale * k.length_scale;
    switch (k.family) {
        case KernelFamily::SquaredExponential:
            return k.signal_variance * std::exp(-0.5 * tau * tau / l2);
        case KernelFamily::Matern32: {
            const double r = kSqrt3 * std::abs(tau) / k.length_scale;
            return k.signal_variance * (1.0 + r) * std::exp(-r);
        }
        case KernelFamily::Matern52: {
            const double r = kSqrt5 * std::abs(tau) / k.length_scale;
            return k.signal_variance * (1.0 + r + r * r / 3.0) * std::exp(-r);
        }
        case KernelFamily::RationalQuadratic: {
            const double u = tau * tau / (2.0 * k.rq_shape * l2);
            return k.signal_variance * std::pow(1.0 + u, -k.rq_shape);
        }
    }
    return 0.0;
}

double first_derivative(const KernelSpec& k, double tau) {
    const double l2 = k.length_scale * k.length_scale;
    switch (k.family) {
        case KernelFamily::SquaredExponential:
            return -tau / l2 * eval(k, tau);
        case KernelFamily::Matern32: {
            const double r = kSqrt3 * std::abs(tau) / k.length_scale;
            return -3.0 * k.signal_variance / l2 * tau * std::exp(-r);
        }
        case KernelFamily::Matern52: {
            const double r = kSqrt5 * std::abs(tau) / k.length_scale;
            return -5.0 * k.signal_variance / (3.0 * l2) * tau * (1.0 + r) * std::exp(-r);
        }
        case KernelFamily::RationalQuadratic: {
            const double u = tau * tau / (2.0 * k.rq_shape * l2);
            return -k.signal_variance * tau / l2 * std::pow(1.0 + u, -k.rq_shape - 1.0);
        }
    }
    return 0.0;
}

double cross_derivative(const KernelSpec& k, double tau) {
    const double l2 = k.length_scale * k.length_scale;
    switch (k.family) {
        case KernelFamily::SquaredExponential:
            return k.signal_variance / l2 * (1.0 - tau * tau / l2) *
                   std::exp(-0.5 * tau * tau / l2);
        case KernelFamily::Matern32: {
            const double r = kSqrt3 * std::abs(tau) / k.length_scale;
            return 3.0 * k.signal_variance / l2 * (1.0 - r) * std::exp(-r);
        }
        case KernelFamily::Matern52: {
            const double r = kSqrt5 * std::abs(tau) / k.length_scale;
            return 5.0 * k.signal_variance / (3.0 * l2) * (1.0 + r - r * r) * std::exp(-r);
        }
        case KernelFamily::RationalQuadratic: {
            const double alpha = k.rq_shape;
            const double u = tau * tau / (2.0 * alpha * l2);
            return k.signal_variance / l2 * std::pow(1.0 + u, -alpha - 2.0) *
                   ((1.0 + u) - (alpha + 1.0) * tau * tau / (alpha * l2));
        }
    }
    return 0.0;
}

double derivative_variance(const KernelSpec& k) {
    const double ratio = k.signal_variance / (k.length_scale * k.length_scale);
    switch (k.family) {
        case KernelFamily::SquaredExponential: return ratio;
        case KernelFamily::Matern32: return 3.0 * ratio;
        case KernelFamily::Matern52: return 5.0 * ratio / 3.0;
        case KernelFamily::RationalQuadratic: return ratio;
    }
    return 0.0;
}

double derivative_correlation(const KernelSpec& k, double tau) {
    const double c = cross_derivative(k, tau) / derivative_variance(k);
    return std::clamp(c * c, 0.0, 1.0);
}

CoregionalizedKernel::CoregionalizedKernel(KernelSpec scalar, Eigen::MatrixXd mixing)
    : scalar_(scalar), mixing_(std::move(mixing)) {
    scalar_.validate();
    if (mixing_.rows() < 1 || mixing_.rows() != mixing_.cols()) {
        throw InputError("coregionalization matrix B must be square and non-empty");
    }
    if (!mixing_.allFinite()) throw InputError("coregionalization matrix B has non-finite entries");
    const double asym = (mixing_ - mixing_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) throw InputError("coregionalization matrix B is not symmetric");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mixing_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10) {
        throw InputError("coregionalization matrix B is not positive semidefinite");
    }
}

CoregionalizedKernel::CoregionalizedKernel(KernelSpec scalar)
    : CoregionalizedKernel(scalar, Eigen::MatrixXd::Ones(1, 1)) {}

Eigen::MatrixXd scalar_gram(const KernelSpec& k, std::span<const double> inputs) {
    const auto n = static_cast<Eigen::Index>(inputs.size());
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        gram(i, i) = k.signal_variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = eval(k, inputs[i] - inputs[j]);
            gram(i, j) = v;
            gram(j, i) = v;
        }
    }
    return gram;
}

Eigen::MatrixXd vector_gram(const CoregionalizedKernel& ck, std::span<const double> inputs) {
    if (inputs.empty()) throw InputError("vector_gram: need at least one input");
    const Eigen::MatrixXd gram = scalar_gram(ck.scalar(), inputs);
    const Eigen::Index n = gram.rows();
    const Eigen::Index d = ck.output_dim();
    Eigen::MatrixXd out(n * d, n * d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            out.block(a * n, b * n, n, n) = ck.mixing()(a, b) * gram;
        }
    }
    return out;
}

}  // namespace gparc::kernels
