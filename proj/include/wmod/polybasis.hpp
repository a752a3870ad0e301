#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace wmod {

/// Index pair (a, b) of the Jacobi family orthogonal against (1-x)^a (1+x)^b.
struct JacobiIndex {
    double a = 0.0;
    double b = 0.0;

    JacobiIndex() = default;
    JacobiIndex(double a_, double b_);

    friend bool operator==(const JacobiIndex&, const JacobiIndex&) = default;
};

/// Jacobi polynomial of degree nu normalized so that P(1) = 1.
/// Throws std::domain_error for |x| > 1.
[[nodiscard]] double eval_jacobi(const JacobiIndex& idx, int nu, double x);

/// Values P^(0..nmax)(x), all normalized to 1 at x = 1.
[[nodiscard]] std::vector<double> eval_jacobi_all(const JacobiIndex& idx, int nmax, double x);

/// Same, written into a caller-provided buffer of size nmax + 1.
void eval_jacobi_all(const JacobiIndex& idx, double x, std::span<double> out);

enum class RuleKind { chebyshev_first_kind, legendre, jacobi, composite };

[[nodiscard]] std::string to_string(RuleKind kind);

/// Selects one of the Gauss rules. For RuleKind::jacobi the weight is
/// (1-x)^idx.a (1+x)^idx.b.
struct RuleFamily {
    RuleKind kind = RuleKind::legendre;
    JacobiIndex idx{};

    static RuleFamily chebyshev() { return {RuleKind::chebyshev_first_kind, {-0.5, -0.5}}; }
    static RuleFamily legendre() { return {RuleKind::legendre, {0.0, 0.0}}; }
    static RuleFamily jacobi(double a, double b) { return {RuleKind::jacobi, {a, b}}; }
};

/// Nodes strictly increasing, weights positive, equal lengths.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    RuleFamily family{};

    [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

/// m-point Gauss rule, exact for degree <= 2m-1 against the family weight.
/// Jacobi nodes come from Newton iteration on the three-term recurrence.
[[nodiscard]] QuadratureRule gauss_rule(const RuleFamily& family, int m);

/// Composite rule on [lo, hi] split at `breaks`, m Gauss-Legendre points per
/// piece after a sigmoidal change of variables that clusters nodes at both
/// ends of every piece. Algebraic endpoint singularities such as |x-s|^g
/// become smooth enough for high-order convergence.
[[nodiscard]] QuadratureRule graded_rule(double lo, double hi, std::span<const double> breaks,
                                         int m);

/// Compensated weighted sum of g over the nodes, in node order.
/// Throws std::domain_error on a non-finite value.
[[nodiscard]] double integrate(const QuadratureRule& rule, const std::function<double(double)>& g);

/// Neumaier summation, used wherever a deterministic, well-conditioned sum is needed.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Gauss-Legendre nodes/weights on [0, 1] after the sigmoidal map
/// u = s^4 / (s^4 + (1-s)^4); cached per m, safe to share across threads.
struct GradedUnitRule {
    std::vector<double> u;
    std::vector<double> w;
};
[[nodiscard]] const GradedUnitRule& graded_unit_rule(int m);

}  // namespace wmod
