#include "wmod/polybasis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace wmod {

JacobiIndex::JacobiIndex(double a_, double b_) : a(a_), b(b_) {
    if (!(a > -1.0) || !(b > -1.0)) {
        throw std::invalid_argument("Jacobi index requires a > -1 and b > -1");
    }
}

namespace {

// Standard-normalization recurrence, writing P_0..P_n(x) into out.
void jacobi_recurrence(double a, double b, double x, std::span<double> out) {
    const std::size_t n = out.size();
    if (n == 0) return;
    out[0] = 1.0;
    if (n == 1) return;
    out[1] = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double kk = static_cast<double>(k);
        const double s = 2.0 * kk + a + b;
        const double c1 = 2.0 * (kk + 1.0) * (kk + a + b + 1.0) * s;
        const double c2 = (s + 1.0) * (s * (s + 2.0) * x + a * a - b * b);
        const double c3 = 2.0 * (kk + a) * (kk + b) * (s + 2.0);
        out[k + 1] = (c2 * out[k] - c3 * out[k - 1]) / c1;
    }
}

// P_m and its derivative in standard normalization, |x| < 1.
std::pair<double, double> jacobi_with_derivative(double a, double b, int m, double x) {
    double prev = 1.0;
    double cur = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0);
    if (m == 0) return {1.0, 0.0};
    for (int k = 1; k < m; ++k) {
        const double kk = k;
        const double s = 2.0 * kk + a + b;
        const double c1 = 2.0 * (kk + 1.0) * (kk + a + b + 1.0) * s;
        const double c2 = (s + 1.0) * (s * (s + 2.0) * x + a * a - b * b);
        const double c3 = 2.0 * (kk + a) * (kk + b) * (s + 2.0);
        const double next = (c2 * cur - c3 * prev) / c1;
        prev = cur;
        cur = next;
    }
    const double mm = m;
    const double s = 2.0 * mm + a + b;
    const double deriv =
        (mm * ((a - b) - s * x) * cur + 2.0 * (mm + a) * (mm + b) * prev) / (s * (1.0 - x * x));
    return {cur, deriv};
}

void check_domain(double x) {
    if (!(std::abs(x) <= 1.0)) {
        throw std::domain_error("Jacobi evaluation outside [-1, 1]");
    }
}

}  // namespace

void eval_jacobi_all(const JacobiIndex& idx, double x, std::span<double> out) {
    check_domain(x);
    std::vector<double> at_one(out.size());
    jacobi_recurrence(idx.a, idx.b, x, out);
    jacobi_recurrence(idx.a, idx.b, 1.0, at_one);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] /= at_one[k];
}

std::vector<double> eval_jacobi_all(const JacobiIndex& idx, int nmax, double x) {
    if (nmax < 0) throw std::invalid_argument("negative degree");
    std::vector<double> out(static_cast<std::size_t>(nmax) + 1);
    eval_jacobi_all(idx, x, out);
    return out;
}

double eval_jacobi(const JacobiIndex& idx, int nu, double x) {
    if (nu < 0) throw std::invalid_argument("negative degree");
    check_domain(x);
    if (nu == 0 || x == 1.0) return 1.0;
    return eval_jacobi_all(idx, nu, x).back();
}

std::string to_string(RuleKind kind) {
    switch (kind) {
        case RuleKind::chebyshev_first_kind: return "chebyshev-first-kind";
        case RuleKind::legendre: return "legendre";
        case RuleKind::jacobi: return "jacobi";
        case RuleKind::composite: return "composite";
    }
    return "unknown";
}

namespace {

QuadratureRule gauss_jacobi(double a, double b, int m, RuleFamily family) {
    constexpr double kTol = 1e-14;
    constexpr int kMaxIter = 100;
    const double pi = std::numbers::pi;

    std::vector<double> roots;
    roots.reserve(static_cast<std::size_t>(m));
    for (int k = 1; k <= m; ++k) {
        // Chebyshev-type guess, exact for a = b = -1/2.
        const double theta = pi * (k - 0.25 + 0.5 * a) / (m + 0.5 * (a + b + 1.0));
        double x = std::cos(std::clamp(theta, 0.0, pi));
        for (int it = 0; it < kMaxIter; ++it) {
            auto [p, dp] = jacobi_with_derivative(a, b, m, x);
            double defl = 0.0;
            for (double r : roots) defl += 1.0 / (x - r);
            const double dx = p / (dp - p * defl);
            x -= dx;
            x = std::clamp(x, -1.0 + 1e-300, 1.0 - 1e-16);
            if (std::abs(dx) <= kTol * std::max(1.0, std::abs(x))) break;
        }
        roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end());

    const double log_const = std::lgamma(m + a + 1.0) + std::lgamma(m + b + 1.0) -
                             std::lgamma(m + a + b + 1.0) - std::lgamma(m + 1.0) +
                             (a + b + 1.0) * std::log(2.0);
    const double c = std::exp(log_const);

    QuadratureRule rule;
    rule.family = family;
    rule.nodes = roots;
    rule.weights.resize(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double x = roots[i];
        const double dp = jacobi_with_derivative(a, b, m, x).second;
        rule.weights[i] = c / ((1.0 - x * x) * dp * dp);
    }
    for (std::size_t i = 1; i < roots.size(); ++i) {
        if (!(rule.nodes[i] > rule.nodes[i - 1])) {
            throw std::runtime_error("Gauss-Jacobi root finding produced coincident nodes");
        }
    }
    return rule;
}

}  // namespace

QuadratureRule gauss_rule(const RuleFamily& family, int m) {
    if (m < 1) throw std::invalid_argument("quadrature rule needs at least one node");
    switch (family.kind) {
        case RuleKind::chebyshev_first_kind: {
            QuadratureRule rule;
            rule.family = RuleFamily::chebyshev();
            rule.nodes.resize(static_cast<std::size_t>(m));
            rule.weights.assign(static_cast<std::size_t>(m), std::numbers::pi / m);
            for (int k = 1; k <= m; ++k) {
                rule.nodes[static_cast<std::size_t>(m - k)] =
                    std::cos((2.0 * k - 1.0) * std::numbers::pi / (2.0 * m));
            }
            return rule;
        }
        case RuleKind::legendre:
            return gauss_jacobi(0.0, 0.0, m, RuleFamily::legendre());
        case RuleKind::jacobi: {
            const JacobiIndex idx(family.idx.a, family.idx.b);
            return gauss_jacobi(idx.a, idx.b, m, family);
        }
        case RuleKind::composite:
            break;
    }
    throw std::invalid_argument("unsupported quadrature kind: " + to_string(family.kind));
}

const GradedUnitRule& graded_unit_rule(int m) {
    static std::mutex mutex;
    static std::map<int, GradedUnitRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;

    const QuadratureRule gl = gauss_rule(RuleFamily::legendre(), m);
    GradedUnitRule out;
    out.u.reserve(gl.size());
    out.w.reserve(gl.size());
    for (std::size_t i = 0; i < gl.size(); ++i) {
        const double s = 0.5 * (gl.nodes[i] + 1.0);
        const double s4 = std::pow(s, 4);
        const double r4 = std::pow(1.0 - s, 4);
        const double den = s4 + r4;
        out.u.push_back(s4 / den);
        const double du = 4.0 * std::pow(s, 3) * std::pow(1.0 - s, 3) / (den * den);
        out.w.push_back(0.5 * gl.weights[i] * du);
    }
    return cache.emplace(m, std::move(out)).first->second;
}

QuadratureRule graded_rule(double lo, double hi, std::span<const double> breaks, int m) {
    if (!(hi > lo)) throw std::invalid_argument("graded rule needs lo < hi");
    if (m < 1) throw std::invalid_argument("graded rule needs at least one node per piece");

    std::vector<double> cuts{lo};
    std::vector<double> inner(breaks.begin(), breaks.end());
    std::sort(inner.begin(), inner.end());
    const double min_width = 1e-12 * (hi - lo);
    for (double b : inner) {
        if (b > lo + min_width && b < hi - min_width && b - cuts.back() > min_width) {
            cuts.push_back(b);
        }
    }
    if (hi - cuts.back() <= min_width) cuts.pop_back();
    cuts.push_back(hi);

    const GradedUnitRule& unit = graded_unit_rule(m);
    QuadratureRule rule;
    rule.family = {RuleKind::composite, {0.0, 0.0}};
    rule.nodes.reserve((cuts.size() - 1) * unit.u.size());
    rule.weights.reserve(rule.nodes.capacity());
    for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
        const double a = cuts[piece];
        const double h = cuts[piece + 1] - a;
        for (std::size_t i = 0; i < unit.u.size(); ++i) {
            const double x = a + h * unit.u[i];
            const double w = h * unit.w[i];
            if (w <= 0.0 || x <= lo || x >= hi) continue;
            if (!rule.nodes.empty() && x <= rule.nodes.back()) continue;
            rule.nodes.push_back(x);
            rule.weights.push_back(w);
        }
    }
    return rule;
}

double integrate(const QuadratureRule& rule, const std::function<double(double)>& g) {
    CompensatedSum sum;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double v = g(rule.nodes[i]);
        if (!std::isfinite(v)) {
            throw std::domain_error("non-finite integrand at quadrature node");
        }
        sum.add(rule.weights[i] * v);
    }
    return sum.value();
}

}  // namespace wmod
