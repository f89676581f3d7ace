#include "gparc/gp.hpp"

#include "gparc/error.hpp"
#include "gparc/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace gparc::gp {

using kernels::CoregionalizedKernel;

Observations Observations::make(std::vector<double> inputs, Eigen::MatrixXd targets,
                                Eigen::VectorXd noise_variance) {
    const auto n = static_cast<Eigen::Index>(inputs.size());
    if (n < 1) throw InputError("observations: need at least one observation");
    if (targets.rows() != n) {
        throw InputError("observations: target rows (" + std::to_string(targets.rows()) +
                         ") do not match input count (" + std::to_string(n) + ")");
    }
    if (targets.cols() < 1) throw InputError("observations: need at least one output column");
    if (!targets.allFinite()) throw InputError("observations: targets must be finite");
    for (double t : inputs) {
        if (!std::isfinite(t)) throw InputError("observations: inputs must be finite");
    }
    if (noise_variance.size() == 1 && targets.cols() > 1) {
        noise_variance = Eigen::VectorXd::Constant(targets.cols(), noise_variance(0));
    }
    if (noise_variance.size() != targets.cols()) {
        throw InputError("observations: need one noise variance per output");
    }
    if ((noise_variance.array() < 0.0).any() || !noise_variance.allFinite()) {
        throw InputError("observations: noise variance must be nonnegative");
    }

    std::vector<Eigen::Index> order(inputs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return inputs[a] < inputs[b]; });

    Observations obs;
    obs.inputs.resize(inputs.size());
    obs.targets.resize(n, targets.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        obs.inputs[i] = inputs[order[i]];
        obs.targets.row(i) = targets.row(order[i]);
        if (i > 0 && obs.inputs[i] - obs.inputs[i - 1] < 1e-12) {
            std::ostringstream msg;
            msg << "observations: duplicate input t=" << obs.inputs[i];
            throw InputError(msg.str());
        }
    }
    obs.noise_variance = std::move(noise_variance);
    return obs;
}

JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& matrix) {
    const Eigen::Index n = matrix.rows();
    if (n == 0) return {Eigen::MatrixXd(0, 0), 0.0};
    const double mean_diag = std::max(matrix.diagonal().mean(), 0.0);
    const double scale = mean_diag > 0.0 ? mean_diag : 1.0;
    for (double rel = 1e-10; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
        Eigen::MatrixXd jittered = matrix;
        jittered.diagonal().array() += rel * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(jittered);
        if (llt.info() == Eigen::Success) {
            Eigen::MatrixXd lower = llt.matrixL();
            if (lower.allFinite()) return {std::move(lower), rel * scale};
        }
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix, Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << "covariance matrix is singular: Cholesky failed with jitter up to 1e-4 x mean diagonal"
        << " (smallest eigenvalue " << eig.eigenvalues().minCoeff() << ")";
    throw NumericalError(msg.str());
}

GpPosterior GpPosterior::prior(CoregionalizedKernel kernel) {
    return GpPosterior(std::move(kernel));
}

GpPosterior fit(CoregionalizedKernel kernel, const Observations& obs) {
    if (obs.size() < 1) throw InputError("fit: need at least one observation");
    if (obs.output_dim() != kernel.output_dim()) {
        throw InputError("fit: observations have " + std::to_string(obs.output_dim()) +
                         " outputs but B is " + std::to_string(kernel.output_dim()) + "x" +
                         std::to_string(kernel.output_dim()));
    }
    GpPosterior gp(std::move(kernel));
    gp.inputs_ = obs.inputs;
    gp.targets_ = obs.targets;

    const Eigen::Index n = obs.size();
    const Eigen::Index d = obs.output_dim();
    Eigen::MatrixXd gram = kernels::vector_gram(gp.kernel_, obs.inputs);
    for (Eigen::Index o = 0; o < d; ++o) {
        gram.diagonal().segment(o * n, n).array() += obs.noise_variance(o);
    }
    gp.factor_ = cholesky_with_jitter(gram);

    const Eigen::Map<const Eigen::VectorXd> y(obs.targets.data(), n * d);
    const auto lower = gp.factor_.lower.triangularView<Eigen::Lower>();
    gp.alpha_ = gp.factor_.lower.transpose().triangularView<Eigen::Upper>().solve(lower.solve(y));
    return gp;
}

template <typename KernelFn>
Eigen::MatrixXd GpPosterior::cross_matrix(std::span<const double> ts, KernelFn&& fn) const {
    const auto m = static_cast<Eigen::Index>(ts.size());
    const auto n = observation_count();
    const Eigen::Index d = output_dim();
    Eigen::MatrixXd scalar(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) scalar(i, j) = fn(ts[i] - inputs_[j]);
    }
    Eigen::MatrixXd out(m * d, n * d);
    const Eigen::MatrixXd& mix = kernel_.mixing();
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) out.block(a * m, b * n, m, n) = mix(a, b) * scalar;
    }
    return out;
}

namespace {

// B (x) [fn(t_i - s_j)], output-outer.
template <typename KernelFn>
Eigen::MatrixXd prior_block(const Eigen::MatrixXd& mix, std::span<const double> ts,
                            std::span<const double> ss, KernelFn&& fn) {
    const auto m = static_cast<Eigen::Index>(ts.size());
    const auto p = static_cast<Eigen::Index>(ss.size());
    const Eigen::Index d = mix.rows();
    Eigen::MatrixXd scalar(m, p);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) scalar(i, j) = fn(ts[i] - ss[j]);
    }
    Eigen::MatrixXd out(m * d, p * d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) out.block(a * m, b * p, m, p) = mix(a, b) * scalar;
    }
    return out;
}

// Grid mean from a cross matrix and weight vector, reshaped to M x D.
Eigen::MatrixXd reshape_mean(const Eigen::VectorXd& flat, Eigen::Index m, Eigen::Index d) {
    return Eigen::Map<const Eigen::MatrixXd>(flat.data(), m, d);
}

int clamp_diagonal(Eigen::MatrixXd& cov) {
    int clamped = 0;
    cov = 0.5 * (cov + cov.transpose()).eval();
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
        if (cov(i, i) < 0.0) {
            cov(i, i) = 0.0;
            ++clamped;
        }
    }
    return clamped;
}

}  // namespace

Eigen::MatrixXd GpPosterior::mean_grid(std::span<const double> ts) const {
    const auto m = static_cast<Eigen::Index>(ts.size());
    if (is_prior()) return Eigen::MatrixXd::Zero(m, output_dim());
    const auto& k = kernel_.scalar();
    const Eigen::MatrixXd cross = cross_matrix(ts, [&](double tau) { return kernels::eval(k, tau); });
    return reshape_mean(cross * alpha_, m, output_dim());
}

Eigen::MatrixXd GpPosterior::deriv_mean_grid(std::span<const double> ts) const {
    const auto m = static_cast<Eigen::Index>(ts.size());
    if (is_prior()) return Eigen::MatrixXd::Zero(m, output_dim());
    const auto& k = kernel_.scalar();
    const Eigen::MatrixXd cross =
        cross_matrix(ts, [&](double tau) { return kernels::first_derivative(k, tau); });
    return reshape_mean(cross * alpha_, m, output_dim());
}

Eigen::MatrixXd GpPosterior::joint_cov(std::span<const double> ts) const {
    const auto& k = kernel_.scalar();
    auto value = [&](double tau) { return kernels::eval(k, tau); };
    Eigen::MatrixXd cov = prior_block(kernel_.mixing(), ts, ts, value);
    if (!is_prior()) {
        const Eigen::MatrixXd w =
            factor_.lower.triangularView<Eigen::Lower>().solve(cross_matrix(ts, value).transpose());
        cov.noalias() -= w.transpose() * w;
    }
    return cov;
}

Eigen::MatrixXd GpPosterior::deriv_joint_cov(std::span<const double> ts) const {
    const auto& k = kernel_.scalar();
    Eigen::MatrixXd cov = prior_block(kernel_.mixing(), ts, ts,
                                      [&](double tau) { return kernels::cross_derivative(k, tau); });
    if (!is_prior()) {
        const Eigen::MatrixXd cross =
            cross_matrix(ts, [&](double tau) { return kernels::first_derivative(k, tau); });
        const Eigen::MatrixXd w =
            factor_.lower.triangularView<Eigen::Lower>().solve(cross.transpose());
        cov.noalias() -= w.transpose() * w;
    }
    return cov;
}

Eigen::VectorXd GpPosterior::posterior_mean(double t) const {
    const double ts[] = {t};
    return mean_grid(ts).row(0).transpose();
}

Eigen::VectorXd GpPosterior::posterior_deriv_mean(double t) const {
    const double ts[] = {t};
    return deriv_mean_grid(ts).row(0).transpose();
}

Eigen::MatrixXd GpPosterior::posterior_cov(double t1, double t2) const {
    const auto& k = kernel_.scalar();
    auto value = [&](double tau) { return kernels::eval(k, tau); };
    Eigen::MatrixXd cov = kernel_.mixing() * value(t1 - t2);
    if (!is_prior()) {
        const double s1[] = {t1};
        const double s2[] = {t2};
        const auto lower = factor_.lower.triangularView<Eigen::Lower>();
        const Eigen::MatrixXd w1 = lower.solve(cross_matrix(s1, value).transpose());
        const Eigen::MatrixXd w2 = lower.solve(cross_matrix(s2, value).transpose());
        cov.noalias() -= w1.transpose() * w2;
    }
    if (t1 == t2) clamp_diagonal(cov);
    return cov;
}

Eigen::MatrixXd GpPosterior::posterior_deriv_cov(double t1, double t2) const {
    const auto& k = kernel_.scalar();
    Eigen::MatrixXd cov = kernel_.mixing() * kernels::cross_derivative(k, t1 - t2);
    if (!is_prior()) {
        auto slope = [&](double tau) { return kernels::first_derivative(k, tau); };
        const double s1[] = {t1};
        const double s2[] = {t2};
        const auto lower = factor_.lower.triangularView<Eigen::Lower>();
        const Eigen::MatrixXd w1 = lower.solve(cross_matrix(s1, slope).transpose());
        const Eigen::MatrixXd w2 = lower.solve(cross_matrix(s2, slope).transpose());
        cov.noalias() -= w1.transpose() * w2;
    }
    if (t1 == t2) clamp_diagonal(cov);
    return cov;
}

Eigen::MatrixXd GpPosterior::deriv_cross_cov(std::span<const double> ts,
                                             std::span<const double> ss) const {
    const auto& k = kernel_.scalar();
    Eigen::MatrixXd cov = prior_block(kernel_.mixing(), ts, ss,
                                      [&](double tau) { return kernels::cross_derivative(k, tau); });
    if (!is_prior()) {
        auto slope = [&](double tau) { return kernels::first_derivative(k, tau); };
        const auto lower = factor_.lower.triangularView<Eigen::Lower>();
        const Eigen::MatrixXd wt = lower.solve(cross_matrix(ts, slope).transpose());
        const Eigen::MatrixXd ws = lower.solve(cross_matrix(ss, slope).transpose());
        cov.noalias() -= wt.transpose() * ws;
    }
    return cov;
}

std::vector<PointDerivative> GpPosterior::derivative_grid(std::span<const double> ts) const {
    const auto m = static_cast<Eigen::Index>(ts.size());
    const Eigen::Index d = output_dim();
    const auto& k = kernel_.scalar();
    const Eigen::MatrixXd prior_cov = kernel_.mixing() * kernels::cross_derivative(k, 0.0);
    const Eigen::MatrixXd means = deriv_mean_grid(ts);

    Eigen::MatrixXd w;
    if (!is_prior()) {
        const Eigen::MatrixXd cross =
            cross_matrix(ts, [&](double tau) { return kernels::first_derivative(k, tau); });
        w = factor_.lower.triangularView<Eigen::Lower>().solve(cross.transpose());
    }
    std::vector<PointDerivative> out(static_cast<std::size_t>(m));
    Eigen::MatrixXd wi;
    for (Eigen::Index i = 0; i < m; ++i) {
        PointDerivative& p = out[static_cast<std::size_t>(i)];
        p.mean = means.row(i).transpose();
        p.cov = prior_cov;
        if (!is_prior()) {
            wi.resize(w.rows(), d);
            for (Eigen::Index o = 0; o < d; ++o) wi.col(o) = w.col(o * m + i);
            p.cov.noalias() -= wi.transpose() * wi;
        }
        p.clamped = clamp_diagonal(p.cov);
    }
    return out;
}

PointDerivative GpPosterior::derivative_at(double t) const {
    PointDerivative out;
    const double ts[] = {t};
    out.mean = deriv_mean_grid(ts).row(0).transpose();
    out.cov = deriv_joint_cov(ts);
    out.clamped = clamp_diagonal(out.cov);
    return out;
}

namespace {

void check_grid(std::span<const double> grid) {
    if (grid.size() < 2) throw InputError("sampling grid needs at least two points");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw InputError("sampling grid must be strictly increasing");
    }
}

}  // namespace

PathSampler::PathSampler(const GpPosterior& gp, std::vector<double> grid)
    : grid_(std::move(grid)), dims_(gp.output_dim()) {
    check_grid(grid_);
    const auto m = static_cast<Eigen::Index>(grid_.size());
    if (gp.is_prior()) {
        // Prior covariance is B (x) K, so sample with L_K Z S^T.
        kronecker_ = true;
        mean_ = Eigen::MatrixXd::Zero(m, dims_);
        const JitteredCholesky chol =
            cholesky_with_jitter(kernels::scalar_gram(gp.kernel().scalar(), grid_));
        grid_factor_ = chol.lower;
        jitter_ = chol.jitter;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gp.kernel().mixing());
        mixing_root_ = eig.eigenvectors() *
                       eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    } else {
        mean_ = gp.mean_grid(grid_);
        const JitteredCholesky chol = cholesky_with_jitter(gp.joint_cov(grid_));
        grid_factor_ = chol.lower;
        jitter_ = chol.jitter;
    }
}

std::vector<Eigen::MatrixXd> PathSampler::draw(std::uint64_t seed, std::uint64_t first,
                                               std::size_t count) const {
    const auto m = static_cast<Eigen::Index>(grid_.size());
    const auto c = static_cast<Eigen::Index>(count);
    const Eigen::Index per_draw = m * dims_;

    // Column k holds the standard normals of draw first+k, output-outer.
    Eigen::MatrixXd normals(per_draw, c);
    for (Eigen::Index k = 0; k < c; ++k) {
        random::PhiloxStream stream(seed, first + static_cast<std::uint64_t>(k));
        for (Eigen::Index i = 0; i < per_draw; ++i) normals(i, k) = stream.normal();
    }

    std::vector<Eigen::MatrixXd> paths;
    paths.reserve(count);
    const auto lower = grid_factor_.triangularView<Eigen::Lower>();
    if (kronecker_) {
        // Reinterpret every draw as an M x D block so one product covers all.
        const Eigen::Map<const Eigen::MatrixXd> z(normals.data(), m, dims_ * c);
        const Eigen::MatrixXd correlated = lower * z;
        for (Eigen::Index k = 0; k < c; ++k) {
            paths.emplace_back(mean_ + correlated.middleCols(k * dims_, dims_) *
                                           mixing_root_.transpose());
        }
    } else {
        const Eigen::MatrixXd correlated = lower * normals;
        for (Eigen::Index k = 0; k < c; ++k) {
            paths.emplace_back(mean_ +
                               Eigen::Map<const Eigen::MatrixXd>(correlated.col(k).data(), m, dims_));
        }
    }
    return paths;
}

std::vector<Eigen::MatrixXd> sample_paths(const GpPosterior& gp, std::span<const double> grid,
                                          std::size_t count, std::uint64_t seed) {
    const PathSampler sampler(gp, std::vector<double>(grid.begin(), grid.end()));
    return sampler.draw(seed, 0, count);
}

}  // namespace gparc::gp
