#include "gparc/arclength.hpp"

#include "gparc/error.hpp"
#include "gparc/integrand_dist.hpp"
#include "gparc/mc_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace al = gparc::arclength;
namespace kn = gparc::kernels;
namespace gp = gparc::gp;

namespace {

kn::KernelSpec se(double var, double len = 1.0) { return {kn::KernelFamily::SquaredExponential, var, len, 1.0}; }
kn::KernelSpec m32() { return {kn::KernelFamily::Matern32, 1.0, 1.0, 1.0}; }

Eigen::MatrixXd random_rotation(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = z(rng);
    }
    return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

gp::GpPosterior fitted_3d() {
    Eigen::MatrixXd y(4, 3);
    y << 0.0, 0.0, 0.0, 0.4, -0.3, 0.2, 0.9, 0.1, 0.5, 1.2, 0.6, 0.4;
    Eigen::Matrix3d b;
    b << 1.0, 0.3, 0.0, 0.3, 1.0, 0.2, 0.0, 0.2, 0.8;
    return gp::fit(kn::CoregionalizedKernel(m32(), b),
                   gp::Observations::make({0.1, 0.4, 0.7, 0.95}, y, Eigen::VectorXd::Constant(1, 1e-3)));
}

}  // namespace

TEST(Interval, Validation) {
    EXPECT_THROW((al::Interval{1.0, 1.0}).validate(), gparc::InputError);
    EXPECT_THROW((al::Interval{0.0, INFINITY}).validate(), gparc::InputError);
    EXPECT_DOUBLE_EQ((al::Interval{-1.0, 2.0}).length(), 3.0);
}

TEST(PriorMean1D, KnownValues) {
    EXPECT_NEAR(al::prior_mean_1d(se(1e-8), {0, 1}), 1.0, 1e-6);
    EXPECT_NEAR(al::prior_mean_1d(se(1.0), {0, 1}), 1.3545308064813, 1e-12);
}

TEST(PriorMean1D, FormsAgree) {
    for (int i = 0; i < 50; ++i) {
        const double s = 0.05 * std::pow(400.0, i / 49.0);
        const auto k = se(s * s);
        const double u = al::prior_mean_1d(k, {0, 1}, al::MeanForm::UForm);
        const double b = al::prior_mean_1d(k, {0, 1}, al::MeanForm::BesselForm);
        EXPECT_NEAR(u / b, 1.0, 1e-8) << s;
    }
}

TEST(PriorMean1D, LinearInLength) {
    for (auto fam : {kn::KernelFamily::SquaredExponential, kn::KernelFamily::Matern52}) {
        const kn::KernelSpec k{fam, 2.0, 0.5, 1.0};
        const double one = al::prior_mean_1d(k, {0, 1});
        EXPECT_DOUBLE_EQ(al::prior_mean_1d(k, {3, 5}), 2.0 * one);
    }
}

TEST(PriorMean1D, IncreasingAndAboveLength) {
    double prev = 1.0;
    for (int i = 0; i < 20; ++i) {
        const double s = 0.02 * std::pow(500.0, i / 19.0);
        const double m = al::prior_mean_1d(se(s * s), {0, 1});
        EXPECT_GT(m, prev);
        EXPECT_GE(m, 1.0);
        prev = m;
    }
}

TEST(PriorMean1D, MomentsOmitVariance) {
    const auto m = al::prior_moments_1d(se(1.0), {0, 1});
    EXPECT_FALSE(m.variance.has_value());
    EXPECT_FALSE(m.second_moment.has_value());
    ASSERT_EQ(m.diagnostics.notes.size(), 1u);
    EXPECT_EQ(m.diagnostics.notes[0], al::kOneDimVarianceNote);
}

TEST(PosteriorMean1D, PriorConsistency) {
    const auto g = gp::GpPosterior::prior(kn::CoregionalizedKernel(m32()));
    const double want = al::prior_mean_1d(m32(), {0, 2});
    const auto got = al::posterior_mean_1d(g, {0, 2});
    EXPECT_NEAR(got.mean / want, 1.0, 1e-10);
    EXPECT_TRUE(got.diagnostics.quadrature_converged);
}

TEST(PosteriorMean1D, SteepDataExceedsRise) {
    Eigen::MatrixXd y(5, 1);
    y << 0, 2.5, 5, 7.5, 10;
    const auto g = gp::fit(kn::CoregionalizedKernel(se(25.0, 0.5)),
                           gp::Observations::make({0.0, 0.25, 0.5, 0.75, 1.0}, y, Eigen::VectorXd::Constant(1, 1e-6)));
    EXPECT_GE(al::posterior_mean_1d(g, {0, 1}).mean, 10.0);
}

TEST(PosteriorMean1D, MatchesMonteCarlo) {
    Eigen::MatrixXd y(3, 1);
    y << 0.2, -0.5, 0.4;
    const auto g = gp::fit(kn::CoregionalizedKernel(m32()),
                           gp::Observations::make({0.2, 0.5, 0.9}, y, Eigen::VectorXd::Constant(1, 1e-2)));
    const auto mc = gparc::mc::empirical_arclength(g, {0, 1}, 1000, 2000, 3, gparc::mc::LengthMode::GraphLength1D);
    EXPECT_NEAR(al::posterior_mean_1d(g, {0, 1}).mean, mc.empirical_mean, 3.0 * mc.mean_std_error);
}

TEST(PosteriorMean1D, RejectsVectorModel) {
    const auto g = gp::GpPosterior::prior(kn::CoregionalizedKernel(m32(), Eigen::Matrix2d::Identity()));
    EXPECT_THROW(al::posterior_mean_1d(g, {0, 1}), gparc::InputError);
}

TEST(PriorMeanND, M32ThreeOutputValue) {
    const kn::CoregionalizedKernel ck(m32(), Eigen::Matrix3d::Identity());
    EXPECT_NEAR(al::prior_mean_nd(ck, {0, 1}), std::sqrt(6.0) / std::tgamma(1.5), 1e-13);
}

TEST(PriorMeanND, ScalarCaseIsHalfNormal) {
    const kn::CoregionalizedKernel ck(se(4.0, 2.0), Eigen::MatrixXd::Ones(1, 1));
    EXPECT_NEAR(al::prior_mean_nd(ck, {0, 3}), 1.0 * std::sqrt(2 / M_PI) * 3.0, 1e-14);
}

TEST(PriorMeanND, ScalesAsSqrtOfB) {
    Eigen::Matrix2d b;
    b << 1.0, 0.4, 0.4, 0.6;
    const double base = al::prior_mean_nd(kn::CoregionalizedKernel(m32(), b), {0, 1});
    EXPECT_NEAR(al::prior_mean_nd(kn::CoregionalizedKernel(m32(), 9.0 * b), {0, 1}), 3.0 * base, 1e-13);
}

TEST(PriorMeanND, RotationInvariant) {
    std::mt19937_64 rng(1);
    Eigen::Matrix3d b;
    b << 2.0, 0.5, 0.1, 0.5, 1.0, 0.3, 0.1, 0.3, 0.4;
    const double base = al::prior_mean_nd(kn::CoregionalizedKernel(m32(), b), {0, 1});
    for (int i = 0; i < 20; ++i) {
        const Eigen::MatrixXd q = random_rotation(rng, 3);
        Eigen::MatrixXd r = q * b * q.transpose();
        r = 0.5 * (r + r.transpose()).eval();
        EXPECT_NEAR(al::prior_mean_nd(kn::CoregionalizedKernel(m32(), r), {0, 1}), base, 1e-12);
    }
}

TEST(PriorMeanND, ZeroMixingIsAnError) {
    EXPECT_THROW(al::prior_mean_nd(kn::CoregionalizedKernel(m32(), Eigen::Matrix2d::Zero()), {0, 1}),
                 gparc::InputError);
}

TEST(PriorSecondMomentND, UncorrelatedLimitHasZeroVariance) {
    // Over a length much longer than the correlation length the double
    // integral of rho^n is O(T), so E[s^2]/E[s]^2 -> 1.
    const kn::CoregionalizedKernel ck(se(1.0, 0.01), Eigen::Matrix3d::Identity());
    const auto m = al::prior_moments_nd(ck, {0, 1}, {256, 2, 1e-12, 1e-12});
    EXPECT_NEAR(*m.second_moment / (m.mean * m.mean), 1.0, 0.01);
    EXPECT_LT(*m.variance / (m.mean * m.mean), 0.01);
}

TEST(PriorSecondMomentND, PerfectlyCorrelatedLimit) {
    const kn::CoregionalizedKernel ck(m32(), Eigen::Matrix3d::Identity());
    const double t = 1e-3;
    const auto r = al::prior_second_moment_nd(ck, {0, t});
    const double omega = 9.0;  // tr(Sigma) = 3 sigma_f'^2
    ASSERT_TRUE(r.diagnostics.series_tail_bound.has_value());
    EXPECT_NEAR(r.value / (t * t), omega, 1e-3 * omega + *r.diagnostics.series_tail_bound / (t * t));
    EXPECT_LE(r.value / (t * t), omega);
}

TEST(PriorSecondMomentND, M32ThreeOutputValues) {
    const kn::CoregionalizedKernel ck(m32(), Eigen::Matrix3d::Identity());
    const auto m = al::prior_moments_nd(ck, {0, 1});
    EXPECT_NEAR(*m.second_moment, 7.9339286659, 1e-8);
    EXPECT_GT(*m.variance, 0.0);
    const auto single = gparc::integrand::nakagami_moments({1.5, 9.0});
    EXPECT_LT(*m.variance, single.variance);
    EXPECT_FALSE(m.diagnostics.variance_clamped);
    EXPECT_LT(*m.diagnostics.series_tail_bound, 1e-6);
}

TEST(PriorVarianceND, NonNegativeForRandomConfigs) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    std::uniform_int_distribution<int> fam(0, 3);
    std::uniform_int_distribution<int> dim(1, 4);
    int clamped = 0;
    for (int i = 0; i < 50; ++i) {
        const kn::KernelSpec k{static_cast<kn::KernelFamily>(fam(rng)), u(rng), u(rng), u(rng)};
        const int d = dim(rng);
        Eigen::MatrixXd a = Eigen::MatrixXd::Random(d, d);
        const Eigen::MatrixXd b = a * a.transpose() + 0.05 * Eigen::MatrixXd::Identity(d, d);
        const auto m = al::prior_moments_nd(kn::CoregionalizedKernel(k, b), {0, u(rng)});
        EXPECT_GE(*m.variance, 0.0);
        EXPECT_GE(*m.variance, -1e-8 * *m.second_moment);
        clamped += m.diagnostics.variance_clamped ? 1 : 0;
    }
    EXPECT_LE(clamped, 1);
}

TEST(PosteriorND, PriorConsistency) {
    Eigen::Matrix2d b;
    b << 1.0, 0.2, 0.2, 0.5;
    const kn::CoregionalizedKernel ck(m32(), b);
    const auto g = gp::GpPosterior::prior(ck);
    const al::Interval iv{0.0, 1.5};
    const auto prior = al::prior_moments_nd(ck, iv);
    const auto post = al::posterior_moments_nd(g, iv);
    EXPECT_NEAR(post.mean / prior.mean, 1.0, 1e-10);
    EXPECT_NEAR(*post.second_moment / *prior.second_moment, 1.0, 1e-7);
}

TEST(PosteriorND, StraightSegmentBound) {
    Eigen::MatrixXd y(6, 3);
    for (int i = 0; i < 6; ++i) y.row(i).setConstant(0.4 * i);
    const auto g = gp::fit(kn::CoregionalizedKernel(se(1.0, 0.5), Eigen::Matrix3d::Identity()),
                           gp::Observations::make({0.0, 0.2, 0.4, 0.6, 0.8, 1.0}, y, Eigen::VectorXd::Constant(1, 1e-8)));
    // Rise r = 2 in each output over the whole interval.
    EXPECT_GE(al::posterior_mean_nd(g, {0, 1}).mean, 2.0 * std::sqrt(3.0) * (1.0 - 1e-6));
}

TEST(PosteriorND, ZeroOrderTermIsSquaredMean) {
    const auto g = fitted_3d();
    al::SeriesPolicy one_term;
    one_term.max_terms = 1;
    const auto mean = al::posterior_mean_nd(g, {0, 1});
    const auto second = al::posterior_second_moment_nd(g, {0, 1}, {}, one_term);
    EXPECT_NEAR(second.value / (mean.mean * mean.mean), 1.0, 1e-7);
}

TEST(PosteriorND, SymmetrizationDifferenceIsReported) {
    const auto second = al::posterior_second_moment_nd(fitted_3d(), {0, 1});
    ASSERT_TRUE(second.diagnostics.symmetrization_difference.has_value());
    EXPECT_LE(std::abs(*second.diagnostics.symmetrization_difference), 1e-12 * second.value);
}

TEST(PosteriorND, MatchesMonteCarlo) {
    const auto g = fitted_3d();
    const auto mc = gparc::mc::empirical_arclength(g, {0, 1}, 1000, 2000, 19, gparc::mc::LengthMode::VectorLength);
    const auto m = al::posterior_moments_nd(g, {0, 1});
    EXPECT_NEAR(m.mean, mc.empirical_mean, 3.0 * mc.mean_std_error + 0.02 * mc.empirical_mean);
    const double mc_second = mc.empirical_variance + mc.empirical_mean * mc.empirical_mean;
    EXPECT_NEAR(*m.second_moment, mc_second, 0.15 * mc_second);
}

TEST(PosteriorND, NormalizedCorrelationPolicy) {
    const auto g = fitted_3d();
    al::SeriesPolicy p;
    p.correlation = al::CorrelationPolicy::PosteriorNormalized;
    const auto normalized = al::posterior_second_moment_nd(g, {0, 1}, {}, p);
    const auto literal = al::posterior_second_moment_nd(g, {0, 1});
    const double mean = al::posterior_mean_nd(g, {0, 1}).mean;
    EXPECT_GE(normalized.value, mean * mean * (1 - 1e-9));
    EXPECT_NEAR(normalized.value / literal.value, 1.0, 0.2);

    // Under the prior both policies coincide.
    const auto prior = gp::GpPosterior::prior(kn::CoregionalizedKernel(m32(), Eigen::Matrix2d::Identity()));
    EXPECT_NEAR(al::posterior_second_moment_nd(prior, {0, 1}, {}, p).value,
                al::posterior_second_moment_nd(prior, {0, 1}).value, 1e-9);
}
