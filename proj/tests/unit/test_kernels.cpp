#include "gparc/kernels.hpp"

#include "gparc/error.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace kn = gparc::kernels;
using kn::KernelFamily;

namespace {

const KernelFamily kFamilies[] = {KernelFamily::SquaredExponential, KernelFamily::Matern32,
                                  KernelFamily::Matern52, KernelFamily::RationalQuadratic};

kn::KernelSpec make(KernelFamily f, double var = 1.3, double len = 0.7, double alpha = 2.5) {
    return {f, var, len, alpha};
}

}  // namespace

TEST(Kernels, NamesRoundTrip) {
    for (auto f : kFamilies) EXPECT_EQ(kn::parse_family(kn::family_name(f)), f);
    EXPECT_THROW(kn::parse_family("exp"), gparc::InputError);
}

TEST(Kernels, ValueAtZeroIsSignalVariance) {
    for (auto f : kFamilies) EXPECT_DOUBLE_EQ(kn::eval(make(f), 0.0), 1.3);
}

TEST(Kernels, DerivativeVarianceTable) {
    const double l2 = 1.3;
    const double s2 = 0.49;
    EXPECT_NEAR(kn::derivative_variance(make(KernelFamily::SquaredExponential)), l2 / s2, 1e-14);
    EXPECT_NEAR(kn::derivative_variance(make(KernelFamily::Matern32)), 3 * l2 / s2, 1e-14);
    EXPECT_NEAR(kn::derivative_variance(make(KernelFamily::Matern52)), 5 * l2 / (3 * s2), 1e-14);
    EXPECT_NEAR(kn::derivative_variance(make(KernelFamily::RationalQuadratic)), l2 / s2, 1e-14);
}

TEST(Kernels, FirstDerivativeMatchesFiniteDifference) {
    const double h = 1e-6;
    for (auto f : kFamilies) {
        const auto k = make(f);
        for (double tau : {-2.1, -0.4, 0.05, 0.9, 3.0}) {
            const double fd = (kn::eval(k, tau + h) - kn::eval(k, tau - h)) / (2 * h);
            EXPECT_NEAR(kn::first_derivative(k, tau), fd, 1e-8) << kn::family_name(f) << ' ' << tau;
        }
        EXPECT_EQ(kn::first_derivative(k, 0.0), 0.0);
    }
}

TEST(Kernels, CrossDerivativeMatchesFiniteDifference) {
    const double h = 1e-6;
    for (auto f : kFamilies) {
        const auto k = make(f);
        for (double tau : {-2.1, -0.4, 0.05, 0.9, 3.0}) {
            const double fd = -(kn::first_derivative(k, tau + h) - kn::first_derivative(k, tau - h)) / (2 * h);
            EXPECT_NEAR(kn::cross_derivative(k, tau), fd, 1e-7) << kn::family_name(f) << ' ' << tau;
        }
    }
}

TEST(Kernels, CrossDerivativeIsEvenAndPeaksAtZero) {
    for (auto f : kFamilies) {
        const auto k = make(f);
        EXPECT_DOUBLE_EQ(kn::cross_derivative(k, 0.0), kn::derivative_variance(k));
        for (double tau : {0.1, 0.8, 2.0}) {
            EXPECT_DOUBLE_EQ(kn::cross_derivative(k, tau), kn::cross_derivative(k, -tau));
            EXPECT_LE(std::abs(kn::cross_derivative(k, tau)), kn::derivative_variance(k));
        }
    }
}

TEST(Kernels, CorrelationInUnitInterval) {
    for (auto f : kFamilies) {
        const auto k = make(f);
        EXPECT_DOUBLE_EQ(kn::derivative_correlation(k, 0.0), 1.0);
        for (double tau = -5.0; tau <= 5.0; tau += 0.173) {
            const double r = kn::derivative_correlation(k, tau);
            EXPECT_GE(r, 0.0);
            EXPECT_LE(r, 1.0);
        }
    }
}

TEST(Kernels, KernelSpecValidation) {
    EXPECT_THROW(make(KernelFamily::Matern32, 0.0).validate(), gparc::InputError);
    EXPECT_THROW(make(KernelFamily::Matern32, 1.0, -1.0).validate(), gparc::InputError);
    EXPECT_THROW(make(KernelFamily::RationalQuadratic, 1.0, 1.0, 0.0).validate(), gparc::InputError);
}

TEST(Coregionalized, RejectsBadMixing) {
    const kn::KernelSpec k;
    EXPECT_THROW(kn::CoregionalizedKernel(k, Eigen::MatrixXd::Ones(2, 3)), gparc::InputError);
    Eigen::Matrix2d asym;
    asym << 1, 0.5, 0.2, 1;
    EXPECT_THROW(kn::CoregionalizedKernel(k, asym), gparc::InputError);
    Eigen::Matrix2d indefinite;
    indefinite << 1, 2, 2, 1;
    EXPECT_THROW(kn::CoregionalizedKernel(k, indefinite), gparc::InputError);
    EXPECT_NO_THROW(kn::CoregionalizedKernel(k, Eigen::Matrix2d::Ones()));
}

TEST(Coregionalized, VectorGramIsKronecker) {
    const kn::KernelSpec k = make(KernelFamily::Matern52);
    Eigen::Matrix2d b;
    b << 2.0, 0.3, 0.3, 0.5;
    const kn::CoregionalizedKernel ck(k, b);
    const std::vector<double> x{0.0, 0.4, 1.1};
    const Eigen::MatrixXd g = kn::vector_gram(ck, x);
    const Eigen::MatrixXd s = kn::scalar_gram(k, x);
    ASSERT_EQ(g.rows(), 6);
    for (int d = 0; d < 2; ++d) {
        for (int e = 0; e < 2; ++e) {
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(g(d * 3 + i, e * 3 + j), b(d, e) * s(i, j));
            }
        }
    }
}
