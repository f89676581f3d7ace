#include "gparc/arclength.hpp"
#include "gparc/gp.hpp"
#include "gparc/integrand_dist.hpp"
#include "gparc/kernels.hpp"
#include "gparc/mc_oracle.hpp"
#include "gparc/specfun.hpp"

#include <benchmark/benchmark.h>

namespace al = gparc::arclength;
namespace gp = gparc::gp;
namespace kn = gparc::kernels;

namespace {

const kn::KernelSpec kM32{kn::KernelFamily::Matern32, 1.0, 1.0, 1.0};

gp::GpPosterior fitted(int n, int d) {
    std::vector<double> t(n);
    Eigen::MatrixXd y(n, d);
    for (int i = 0; i < n; ++i) {
        t[i] = (i + 0.5) / n;
        for (int j = 0; j < d; ++j) y(i, j) = std::sin(3.0 * t[i] + j);
    }
    return gp::fit(kn::CoregionalizedKernel(kM32, Eigen::MatrixXd::Identity(d, d)),
                   gp::Observations::make(t, y, Eigen::VectorXd::Constant(1, 1e-3)));
}

void BM_HypU(benchmark::State& state) {
    double z = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gparc::specfun::hyp_u(0.5, 2.0, z));
        z = z < 50.0 ? z * 1.1 : 0.1;
    }
}
BENCHMARK(BM_HypU);

void BM_BesselK(benchmark::State& state) {
    double z = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gparc::specfun::bessel_k(1, z));
        z = z < 50.0 ? z * 1.1 : 0.1;
    }
}
BENCHMARK(BM_BesselK);

void BM_IntegrandMean1D(benchmark::State& state) {
    const double mu = static_cast<double>(state.range(0)) / 10.0;
    for (auto _ : state) benchmark::DoNotOptimize(gparc::integrand::mean_1d({mu, 0.8}).value);
}
BENCHMARK(BM_IntegrandMean1D)->Arg(0)->Arg(10)->Arg(40);

void BM_PriorSecondMoment(benchmark::State& state) {
    const kn::CoregionalizedKernel ck(kM32, Eigen::Matrix3d::Identity());
    for (auto _ : state) benchmark::DoNotOptimize(al::prior_second_moment_nd(ck, {0, 1}).value);
}
BENCHMARK(BM_PriorSecondMoment)->Unit(benchmark::kMillisecond);

void BM_PosteriorMoments(benchmark::State& state) {
    const auto g = fitted(static_cast<int>(state.range(0)), 3);
    for (auto _ : state) benchmark::DoNotOptimize(al::posterior_moments_nd(g, {0, 1}).mean);
}
BENCHMARK(BM_PosteriorMoments)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_PathSampling(benchmark::State& state) {
    const auto g = gp::GpPosterior::prior(kn::CoregionalizedKernel(kM32, Eigen::Matrix3d::Identity()));
    const auto grid = gparc::mc::uniform_grid(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
    const gp::PathSampler sampler(g, grid);
    std::uint64_t first = 0;
    for (auto _ : state) {
        const auto paths = sampler.draw(1, first, 64);
        benchmark::DoNotOptimize(gparc::mc::path_length(paths.front(), grid));
        first += 64;
    }
}
BENCHMARK(BM_PathSampling)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
