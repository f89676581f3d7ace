#pragma once

// Zero-mean scalar and vector-valued GP regression with the separable kernel
// B (x) k: predictive mean and covariance, the same for the derivative
// process, and joint path sampling.
//
// Vectors indexed by (output d, input i) use the output-outer layout d*N + i.

#include "gparc/kernels.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace gparc::gp {

struct Observations {
    std::vector<double> inputs;       // N curve parameters, strictly increasing
    Eigen::MatrixXd targets;          // N x D
    Eigen::VectorXd noise_variance;   // one entry per output

    /// Sorts by input and validates. `noise_variance` may hold a single entry,
    /// which is shared by every output. Throws InputError on duplicate inputs
    /// (closer than 1e-12), shape mismatch, negative noise or N = 0.
    static Observations make(std::vector<double> inputs, Eigen::MatrixXd targets,
                             Eigen::VectorXd noise_variance);

    Eigen::Index size() const { return static_cast<Eigen::Index>(inputs.size()); }
    Eigen::Index output_dim() const { return targets.cols(); }
};

/// Lower Cholesky factor with the diagonal jitter that made it succeed.
struct JitteredCholesky {
    Eigen::MatrixXd lower;
    double jitter = 0.0;  // absolute amount added to the diagonal
};

/// Factorizes a symmetric matrix, adding 1e-10 x mean-diagonal to the
/// diagonal and escalating by 10x up to 1e-4 x mean-diagonal. Throws
/// NumericalError naming the smallest eigenvalue when every attempt fails.
JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& matrix);

/// Derivative-process moments at one point.
struct PointDerivative {
    Eigen::VectorXd mean;  // D
    Eigen::MatrixXd cov;   // D x D
    int clamped = 0;       // diagonal entries raised from negative round-off to 0
};

class GpPosterior {
public:
    /// The prior: no observations, zero mean, covariance B k.
    static GpPosterior prior(kernels::CoregionalizedKernel kernel);

    const kernels::CoregionalizedKernel& kernel() const { return kernel_; }
    Eigen::Index output_dim() const { return kernel_.output_dim(); }
    Eigen::Index observation_count() const { return static_cast<Eigen::Index>(inputs_.size()); }
    bool is_prior() const { return inputs_.empty(); }
    std::span<const double> inputs() const { return inputs_; }
    const Eigen::MatrixXd& targets() const { return targets_; }
    double jitter() const { return factor_.jitter; }
    /// Lower Cholesky factor of B (x) K(X,X) + noise (+ jitter).
    const Eigen::MatrixXd& cholesky_factor() const { return factor_.lower; }

    Eigen::VectorXd posterior_mean(double t) const;
    /// Cross-covariance of f(t1) and f(t2); at t1 == t2 negative diagonal
    /// round-off is clamped to zero.
    Eigen::MatrixXd posterior_cov(double t1, double t2) const;

    Eigen::VectorXd posterior_deriv_mean(double t) const;
    Eigen::MatrixXd posterior_deriv_cov(double t1, double t2) const;
    PointDerivative derivative_at(double t) const;

    /// Predictive mean over a grid, M x D.
    Eigen::MatrixXd mean_grid(std::span<const double> ts) const;
    /// Joint predictive covariance over a grid, MD x MD, output-outer.
    Eigen::MatrixXd joint_cov(std::span<const double> ts) const;

    /// Derivative-process mean over a grid, M x D.
    Eigen::MatrixXd deriv_mean_grid(std::span<const double> ts) const;
    /// Joint derivative-process covariance over a grid, MD x MD, output-outer.
    Eigen::MatrixXd deriv_joint_cov(std::span<const double> ts) const;

    /// Per-point derivative mean and D x D covariance over a grid, without
    /// forming the joint covariance.
    std::vector<PointDerivative> derivative_grid(std::span<const double> ts) const;

    /// Derivative cross-covariance between two grids, MD x PD, output-outer
    /// on both sides.
    Eigen::MatrixXd deriv_cross_cov(std::span<const double> ts, std::span<const double> ss) const;

private:
    friend GpPosterior fit(kernels::CoregionalizedKernel kernel, const Observations& obs);

    explicit GpPosterior(kernels::CoregionalizedKernel kernel) : kernel_(std::move(kernel)) {}

    // (M*D) x (N*D) cross-covariance between the grid and the training inputs
    // for a given scalar kernel functional.
    template <typename KernelFn>
    Eigen::MatrixXd cross_matrix(std::span<const double> ts, KernelFn&& fn) const;

    kernels::CoregionalizedKernel kernel_;
    std::vector<double> inputs_;
    Eigen::MatrixXd targets_;
    JitteredCholesky factor_;
    Eigen::VectorXd alpha_;  // (K + Sigma)^-1 y, output-outer
};

/// Conditions the GP on observations. Requires N >= 1 and matching output
/// dimension; use GpPosterior::prior for the unconditioned process.
GpPosterior fit(kernels::CoregionalizedKernel kernel, const Observations& obs);

/// Joint sampler over a fixed grid. The factorization is computed once; draw
/// `k` takes its normals from Philox stream (seed, k).
class PathSampler {
public:
    PathSampler(const GpPosterior& gp, std::vector<double> grid);

    const std::vector<double>& grid() const { return grid_; }
    Eigen::Index output_dim() const { return dims_; }
    double jitter() const { return jitter_; }

    /// Draws paths first .. first+count-1, each M x D.
    std::vector<Eigen::MatrixXd> draw(std::uint64_t seed, std::uint64_t first,
                                      std::size_t count) const;

private:
    std::vector<double> grid_;
    Eigen::Index dims_;
    Eigen::MatrixXd mean_;        // M x D
    bool kronecker_ = false;
    Eigen::MatrixXd grid_factor_;  // M x M (Kronecker) or MD x MD (dense)
    Eigen::MatrixXd mixing_root_;  // D x D with S S^T = B (Kronecker only)
    double jitter_ = 0.0;
};

/// `count` joint draws over `grid`, each M x D.
std::vector<Eigen::MatrixXd> sample_paths(const GpPosterior& gp, std::span<const double> grid,
                                          std::size_t count, std::uint64_t seed);

}  // namespace gparc::gp
