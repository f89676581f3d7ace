#include "gparc/integrand_dist.hpp"

#include "gparc/error.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace in = gparc::integrand;

namespace {

// Density of |X| at 0, the v -> 0 limit of the transformed integrand.
double abs_density_at_zero(const in::Integrand1D& d) {
    return 2.0 * std::exp(-0.5 * d.mu * d.mu / (d.sigma * d.sigma)) / (std::sqrt(2 * M_PI) * d.sigma);
}

// int_1^inf pdf(y) dy after y = sqrt(1 + v^2), which removes the endpoint
// singularity.
double pdf_mass(const in::Integrand1D& d) {
    const double upper = std::abs(d.mu) + 14.0 * d.sigma;
    return oracle::simpson_panels(
        [&](double v) {
            if (v == 0.0) return abs_density_at_zero(d);
            const double y = std::hypot(1.0, v);
            return in::pdf_1d(d, y) * v / y;
        },
        0.0, upper, 200, 1e-10);
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = z(rng);
    }
    return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST(Pdf1D, KnownValueAndSupport) {
    const in::Integrand1D d{0.0, 1.0};
    EXPECT_NEAR(in::pdf_1d(d, std::sqrt(2.0)), 2.0 * std::exp(-0.5) * std::sqrt(2.0) / std::sqrt(2 * M_PI), 1e-14);
    EXPECT_EQ(in::pdf_1d(d, 0.5), 0.0);
    EXPECT_EQ(in::pdf_1d(d, 1.0), 0.0);
}

TEST(Pdf1D, NormalizesOnGrid) {
    for (double mu : {0.0, 1.0, -1.0, 3.0, -3.0}) {
        for (double sigma : {0.3, 1.0, 3.0}) {
            EXPECT_NEAR(pdf_mass({mu, sigma}), 1.0, 1e-6) << mu << ' ' << sigma;
        }
    }
}

TEST(Cdf1D, KnownValuesAndLimits) {
    const in::Integrand1D d{0.0, 1.0};
    EXPECT_EQ(in::cdf_1d(d, 1.0), 0.0);
    EXPECT_NEAR(in::cdf_1d(d, std::sqrt(2.0)), 2.0 * 0.841344746068542948 - 1.0, 1e-14);
    EXPECT_NEAR(in::cdf_1d(d, 1e6), 1.0, 1e-12);
}

TEST(Cdf1D, IsIntegralOfPdf) {
    const in::Integrand1D d{0.7, 1.3};
    for (int i = 1; i <= 20; ++i) {
        const double y = 1.0 + 0.25 * i;
        const double v_max = std::sqrt(y * y - 1.0);
        const double mass = oracle::simpson_panels(
            [&](double v) {
                if (v == 0.0) return abs_density_at_zero(d);
                const double yy = std::hypot(1.0, v);
                return in::pdf_1d(d, yy) * v / yy;
            },
            0.0, v_max, 20, 1e-10);
        EXPECT_NEAR(in::cdf_1d(d, y), mass, 1e-6) << y;
    }
}

TEST(Cdf1D, Monotone) {
    const in::Integrand1D d{-1.5, 0.4};
    double prev = 0.0;
    for (double y = 1.0; y < 6.0; y += 0.01) {
        const double c = in::cdf_1d(d, y);
        EXPECT_GE(c, prev);
        prev = c;
    }
}

TEST(Mean1D, KnownLimits) {
    EXPECT_NEAR(in::mean_1d({0.0, 1e-4}).value, 1.0, 1e-6);
    EXPECT_NEAR(in::mean_1d({0.0, 1.0}).value, 1.3545308064813, 1e-12);
    EXPECT_NEAR(in::mean_1d({3.0, 0.1}).value, std::sqrt(10.0), 1e-3);
}

TEST(Mean1D, SeriesAgreesWithQuadrature) {
    for (double mu : {0.0, 0.4, 1.0, 2.5, 5.0}) {
        for (double sigma : {0.2, 0.7, 1.0, 2.0, 4.0}) {
            const in::Integrand1D d{mu, sigma};
            const auto m = in::mean_1d(d);
            const double direct = oracle::simpson_panels(
                [&](double x) {
                    const double z = (x - mu) / sigma;
                    return std::hypot(1.0, x) * std::exp(-0.5 * z * z) / (sigma * std::sqrt(2 * M_PI));
                },
                mu - 12 * sigma, mu + 12 * sigma, 48, 1e-13);
            EXPECT_NEAR(m.value / direct, 1.0, 1e-10) << mu << ' ' << sigma;
        }
    }
}

TEST(Mean1D, SeriesPathIsTakenAndReported) {
    const auto m = in::mean_1d({1.0, 1.0});
    EXPECT_EQ(m.method, in::MeanMethod::Series);
    EXPECT_TRUE(m.series.converged);
    EXPECT_GT(m.series.terms_used, 1u);
}

TEST(Mean1D, FallsBackForLargeDrift) {
    const auto m = in::mean_1d({50.0, 0.5});
    EXPECT_EQ(m.method, in::MeanMethod::Quadrature);
    EXPECT_NEAR(m.value, std::sqrt(1.0 + 2500.0), 0.01);
}

TEST(Mean1D, EvenInMuAndAtLeastOne) {
    for (double mu : {0.1, 0.9, 2.2, 7.0}) {
        for (double sigma : {0.05, 0.5, 3.0}) {
            const double a = in::mean_1d({mu, sigma}).value;
            const double b = in::mean_1d({-mu, sigma}).value;
            EXPECT_NEAR(a, b, 1e-12 * a);
            EXPECT_GE(a, 1.0);
            EXPECT_GE(a, std::abs(mu) * 0.999);
        }
    }
}

TEST(Mean1D, MatchesMonteCarlo) {
    const auto mc = oracle::graph_integrand_mc(0.0, 1.0, 1'000'000, 17);
    EXPECT_NEAR(in::mean_1d({0.0, 1.0}).value, mc.mean, 3.0 * mc.mean_se);
}

TEST(QuadraticForm, ClosedFormCases) {
    const auto a = in::quadratic_form_moments(Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity());
    EXPECT_DOUBLE_EQ(a.mean, 3.0);
    EXPECT_DOUBLE_EQ(a.variance, 6.0);
    const auto b = in::quadratic_form_moments(Eigen::Vector3d(1, 0, 0), Eigen::Matrix3d::Identity());
    EXPECT_DOUBLE_EQ(b.mean, 4.0);
    EXPECT_DOUBLE_EQ(b.variance, 10.0);
    Eigen::Matrix2d asym;
    asym << 1, 0.1, 0.0, 1;
    EXPECT_THROW(in::quadratic_form_moments(Eigen::Vector2d::Zero(), asym), gparc::InputError);
}

TEST(QuadraticForm, MatchesMonteCarlo) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    const Eigen::MatrixXd sigma = random_spd(rng, 3);
    const Eigen::Vector3d mu(z(rng), z(rng), z(rng));
    const auto want = in::quadratic_form_moments(mu, sigma);
    const Eigen::MatrixXd x = oracle::gaussian_draws(mu, sigma, 400000, 21);
    oracle::Accumulator acc;
    for (Eigen::Index i = 0; i < x.cols(); ++i) acc.add(x.col(i).squaredNorm());
    const auto got = acc.finish();
    EXPECT_NEAR(want.mean, got.mean, 3.0 * got.mean_se);
    EXPECT_NEAR(want.variance, got.variance, 3.0 * got.variance_se);
}

TEST(Gamma, FitAndTransform) {
    auto g = in::fit_gamma(3.0, 6.0);
    EXPECT_DOUBLE_EQ(g.shape, 1.5);
    EXPECT_DOUBLE_EQ(g.scale, 2.0);
    g = in::fit_gamma(4.0, 10.0);
    EXPECT_DOUBLE_EQ(g.shape, 1.6);
    EXPECT_DOUBLE_EQ(g.scale, 2.5);
    auto n = in::gamma_to_nakagami(g);
    EXPECT_DOUBLE_EQ(n.m, 1.6);
    EXPECT_DOUBLE_EQ(n.omega, 4.0);
    n = in::gamma_to_nakagami({0.5, 2.0});
    EXPECT_DOUBLE_EQ(n.m, 0.5);
    EXPECT_DOUBLE_EQ(n.omega, 1.0);
    EXPECT_THROW(in::fit_gamma(0.0, 1.0), gparc::InputError);
    EXPECT_THROW(in::fit_gamma(1.0, -1.0), gparc::InputError);
}

TEST(Nakagami, FromNormal) {
    auto p = in::nakagami_from_normal(Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity());
    EXPECT_DOUBLE_EQ(p.m, 1.5);
    EXPECT_DOUBLE_EQ(p.omega, 3.0);
    p = in::nakagami_from_normal(Eigen::VectorXd::Zero(5), 4.0 * Eigen::MatrixXd::Identity(5, 5));
    EXPECT_DOUBLE_EQ(p.m, 2.5);
    EXPECT_DOUBLE_EQ(p.omega, 20.0);
    EXPECT_THROW(in::nakagami_from_normal(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Zero()),
                 gparc::InputError);
}

TEST(Nakagami, MomentMatchingIsExact) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::MatrixXd sigma = random_spd(rng, 4);
        Eigen::VectorXd mu(4);
        for (int i = 0; i < 4; ++i) mu(i) = z(rng);
        const auto q = in::quadratic_form_moments(mu, sigma);
        const auto p = in::nakagami_from_normal(mu, sigma);
        EXPECT_NEAR(p.omega, q.mean, 1e-12 * q.mean);
        EXPECT_NEAR(p.omega * p.omega / p.m, q.variance, 1e-12 * q.variance);
    }
}

TEST(Nakagami, IdenticalEigenvaluesGiveChiMean) {
    for (int n = 1; n <= 8; ++n) {
        const double s = 0.7;
        const auto p = in::nakagami_from_normal(Eigen::VectorXd::Zero(n), s * s * Eigen::MatrixXd::Identity(n, n));
        EXPECT_NEAR(in::nakagami_mean(p), oracle::chi_mean(n, s), 1e-10);
    }
}

TEST(Nakagami, PdfValues) {
    EXPECT_NEAR(in::nakagami_pdf({0.5, 1.0}, 1.0), std::sqrt(2 / M_PI) * std::exp(-0.5), 1e-14);
    const in::NakagamiParams p{1.5, 3.0};
    const double mass = oracle::simpson_panels([&](double x) { return in::nakagami_pdf(p, x); }, 0.0, 15.0, 30, 1e-13);
    EXPECT_NEAR(mass, 1.0, 1e-8);
    // Mode at sqrt(Omega (2m-1)/(2m)) = sqrt(2).
    const double mode = std::sqrt(2.0);
    EXPECT_GT(in::nakagami_pdf(p, mode), in::nakagami_pdf(p, mode - 1e-3));
    EXPECT_GT(in::nakagami_pdf(p, mode), in::nakagami_pdf(p, mode + 1e-3));
    EXPECT_EQ(in::nakagami_pdf(p, -1.0), 0.0);
}

TEST(Nakagami, PdfLargeShapeStaysFinite) {
    const double v = in::nakagami_pdf({400.0, 900.0}, 30.0);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 0.0);
}

TEST(Nakagami, Moments) {
    EXPECT_NEAR(in::nakagami_mean({0.5, 1.0}), std::sqrt(2 / M_PI), 1e-15);
    EXPECT_NEAR(in::nakagami_mean({1.5, 3.0}), std::sqrt(2.0) / std::tgamma(1.5), 1e-14);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.05, 50.0);
    for (int i = 0; i < 100; ++i) {
        const in::NakagamiParams p{u(rng), u(rng)};
        const auto m = in::nakagami_moments(p);
        EXPECT_NEAR(m.mean * m.mean + m.variance, p.omega, 1e-12 * p.omega);
        EXPECT_GE(m.variance, 0.0);
    }
    EXPECT_TRUE((in::NakagamiParams{0.3, 1.0}).below_classical_range());
}

TEST(Nakagami, ChiThreeMatchesMonteCarlo) {
    const Eigen::MatrixXd x = oracle::gaussian_draws(Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity(), 400000, 5);
    oracle::Accumulator acc;
    for (Eigen::Index i = 0; i < x.cols(); ++i) acc.add(x.col(i).norm());
    const auto mc = acc.finish();
    EXPECT_NEAR(in::nakagami_mean({1.5, 3.0}), mc.mean, 3.0 * mc.mean_se);
}

TEST(MixedMoment, Endpoints) {
    const in::NakagamiParams p{1.5, 3.0};
    EXPECT_NEAR(in::nakagami_mixed_moment(p, 0.0), std::pow(in::nakagami_mean(p), 2), 1e-12);
    EXPECT_DOUBLE_EQ(in::nakagami_mixed_moment(p, 1.0), 3.0);
    EXPECT_THROW(in::nakagami_mixed_moment(p, 1.5), gparc::InputError);
}

TEST(MixedMoment, NondecreasingInRho) {
    const in::NakagamiParams p{0.8, 2.0};
    double prev = 0.0;
    for (double rho = 0.0; rho < 0.999; rho += 0.05) {
        const double v = in::nakagami_mixed_moment(p, rho);
        EXPECT_GE(v, prev);
        prev = v;
    }
    EXPECT_LE(prev, p.omega);
}

TEST(MixedMoment, MatchesCorrelatedGammaOracle) {
    const in::NakagamiParams p{1.5, 3.0};
    const auto mc = oracle::correlated_nakagami_product(3, 3.0, 0.25, 1'000'000, 12);
    EXPECT_NEAR(in::nakagami_mixed_moment(p, 0.25), mc.mean, 3.0 * mc.mean_se);
}

TEST(QuadraticFormOracle, ChiSquaredTwoAndCrossCheck) {
    const auto s = in::quadratic_form_sample_oracle(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity(),
                                                    Eigen::Matrix2d::Identity(), 200000, 1);
    oracle::Accumulator acc;
    for (double v : s) acc.add(v);
    const auto m = acc.finish();
    EXPECT_NEAR(m.mean, 2.0, 3.0 * m.mean_se);

    std::mt19937_64 rng(6);
    const Eigen::MatrixXd sigma = random_spd(rng, 3);
    const Eigen::Vector3d mu(0.5, -1.0, 2.0);
    Eigen::Matrix3d a;
    a << 2, 0.3, 0, 0.3, 1, 0.1, 0, 0.1, 0.5;
    const auto direct = in::quadratic_form_sample_oracle(mu, sigma, a, 200000, 2);
    const auto eigen = in::quadratic_form_sample_oracle(mu, sigma, a, 200000, 3,
                                                       in::QuadraticFormSampling::Eigenexpansion);
    oracle::Accumulator da;
    oracle::Accumulator ea;
    for (double v : direct) da.add(v);
    for (double v : eigen) ea.add(v);
    const auto dm = da.finish();
    const auto em = ea.finish();
    EXPECT_NEAR(dm.mean, em.mean, 3.0 * std::hypot(dm.mean_se, em.mean_se));
    // Exact mean: tr(A Sigma) + mu^T A mu.
    const double exact = (a * sigma).trace() + mu.dot(a * mu);
    EXPECT_NEAR(em.mean, exact, 3.0 * em.mean_se);
}

TEST(QuadraticFormOracle, Reproducible) {
    const auto a = in::quadratic_form_sample_oracle(Eigen::Vector2d(1, 2), Eigen::Matrix2d::Identity(),
                                                    Eigen::Matrix2d::Identity(), 100, 9);
    const auto b = in::quadratic_form_sample_oracle(Eigen::Vector2d(1, 2), Eigen::Matrix2d::Identity(),
                                                    Eigen::Matrix2d::Identity(), 100, 9);
    EXPECT_EQ(a, b);
}
