#include "gparc/quadrature.hpp"

#include "gparc/error.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace gparc::quadrature {

void QuadratureSpec::validate() const {
    if (nodes_per_axis < 2) throw InputError("quadrature: nodes_per_axis must be >= 2");
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
        throw InputError("quadrature: tolerances must be positive");
    }
}

namespace {

GaussLegendreRule build_rule(std::size_t n) {
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t half = (n + 1) / 2;
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < half; ++i) {
        // Tricomi initial guess for the i-th largest root, then Newton.
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double dk = static_cast<double>(k);
                const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
                p0 = p1;
                p1 = p2;
            }
            dp = dn * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double dk = static_cast<double>(k);
            const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
            p0 = p1;
            p1 = p2;
        }
        dp = dn * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[n - 1 - i] = x;
        rule.nodes[i] = -x;
        rule.weights[n - 1 - i] = w;
        rule.weights[i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

bool within(double error, double value, const QuadratureSpec& spec) {
    return error <= spec.abs_tol || error <= spec.rel_tol * std::abs(value);
}

}  // namespace

std::shared_ptr<const GaussLegendreRule> gauss_legendre(std::size_t n) {
    if (n < 1) throw InputError("gauss_legendre: need at least one node");
    static std::mutex mutex;
    static std::map<std::size_t, std::shared_ptr<const GaussLegendreRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_shared<const GaussLegendreRule>(build_rule(n));
    return slot;
}

MappedRule mapped_rule(std::span<const double> breaks, std::size_t n) {
    if (breaks.size() < 2) throw InputError("mapped_rule: need at least two breakpoints");
    const auto rule = gauss_legendre(n);
    MappedRule out;
    out.nodes.reserve((breaks.size() - 1) * n);
    out.weights.reserve((breaks.size() - 1) * n);
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double lo = breaks[p];
        const double hi = breaks[p + 1];
        if (!(hi > lo)) throw InputError("mapped_rule: breakpoints must be strictly increasing");
        const double half = 0.5 * (hi - lo);
        const double mid = 0.5 * (hi + lo);
        for (std::size_t i = 0; i < n; ++i) {
            out.nodes.push_back(mid + half * rule->nodes[i]);
            out.weights.push_back(half * rule->weights[i]);
        }
    }
    return out;
}

MappedRule mapped_rule(double a, double b, std::size_t n) {
    const double breaks[] = {a, b};
    return mapped_rule(std::span<const double>(breaks), n);
}

QuadratureResult refine(const std::function<double(std::size_t)>& eval,
                        const QuadratureSpec& spec) {
    spec.validate();
    QuadratureResult out;
    std::size_t n = spec.nodes_per_axis;
    double value = eval(n);
    if (spec.refinements == 0) {
        const double coarse = eval(std::max<std::size_t>(1, n / 2));
        out.value = value;
        out.error_estimate = std::abs(value - coarse);
        out.converged = within(out.error_estimate, value, spec);
        out.nodes_used = n;
        return out;
    }
    for (std::size_t r = 0; r < spec.refinements; ++r) {
        const std::size_t finer = 2 * n;
        const double refined = eval(finer);
        out.error_estimate = std::abs(refined - value);
        value = refined;
        n = finer;
        out.converged = within(out.error_estimate, value, spec);
        if (out.converged) break;
    }
    out.value = value;
    out.nodes_used = n;
    return out;
}

QuadratureResult integrate_1d_piecewise(const Function1D& f, std::span<const double> breaks,
                                        const QuadratureSpec& spec) {
    auto eval = [&](std::size_t n) {
        const MappedRule rule = mapped_rule(breaks, n);
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(rule.nodes[i]);
        return sum;
    };
    return refine(eval, spec);
}

QuadratureResult integrate_1d(const Function1D& f, double a, double b,
                              const QuadratureSpec& spec) {
    if (a == b) return {0.0, 0.0, true, 0};
    if (b < a) {
        QuadratureResult r = integrate_1d(f, b, a, spec);
        r.value = -r.value;
        return r;
    }
    const double breaks[] = {a, b};
    return integrate_1d_piecewise(f, std::span<const double>(breaks), spec);
}

QuadratureResult integrate_2d(const Function2D& f, const Box& box, const QuadratureSpec& spec) {
    auto eval = [&](std::size_t n) {
        const MappedRule rx = mapped_rule(box.x0, box.x1, n);
        const MappedRule ry = mapped_rule(box.y0, box.y1, n);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += ry.weights[j] * f(rx.nodes[i], ry.nodes[j]);
            sum += rx.weights[i] * row;
        }
        return sum;
    };
    return refine(eval, spec);
}

}  // namespace gparc::quadrature
