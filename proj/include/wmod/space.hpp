#pragma once

#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wmod {

using RealFn = std::function<double(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// (p, alpha) of the space of f with f * sigma^alpha in L_p[-1, 1].
/// p = +infinity selects the uniform norm.
struct WeightParams {
    double p = kInf;
    double alpha = 1.0;

    WeightParams() = default;
    WeightParams(double p_, double alpha_);

    [[nodiscard]] bool is_uniform() const { return p == kInf; }

    friend bool operator==(const WeightParams&, const WeightParams&) = default;
};

/// "inf" or the shortest round-tripping decimal.
[[nodiscard]] std::string format_p(double p);
/// Parses "inf"/"infinity" or a number >= 1; throws std::invalid_argument.
[[nodiscard]] double parse_p(std::string_view text);
[[nodiscard]] std::string describe(const WeightParams& w);

struct SigmaWeight {
    RealFn sigma;
    std::string name;

    double operator()(double u) const { return sigma(u); }
};

/// An evaluable function on [-1, 1]. `breakpoints` lists interior points where
/// the function is not smooth; quadrature and sampling split there.
struct FunctionHandle {
    RealFn eval;
    std::string label;
    std::map<std::string, std::string> metadata;
    std::vector<double> breakpoints;

    double operator()(double x) const { return eval(x); }
};

[[nodiscard]] FunctionHandle constant_function(double c);
/// a*f + b*g, with the union of both breakpoint sets.
[[nodiscard]] FunctionHandle linear_combination(double a, const FunctionHandle& f, double b,
                                                const FunctionHandle& g);
[[nodiscard]] FunctionHandle scaled(double c, const FunctionHandle& f);

struct NormResolution {
    int quad_nodes = 512;    ///< total Gauss nodes for p < infinity, spread over the pieces
    int sup_samples = 4097;  ///< Chebyshev sample count for p = infinity
    double refine_tol = 1e-10;  ///< golden-section bracket width for p = infinity

    [[nodiscard]] NormResolution doubled() const {
        return {2 * quad_nodes, 2 * sup_samples + 1, refine_tol};
    }
};

/// ||g sigma^alpha||_p on [-1, 1]. Finite p uses graded composite Gauss rules
/// split at `breaks`; p = infinity samples a Chebyshev grid (plus the breaks)
/// and refines the three largest samples by golden-section search.
[[nodiscard]] double weighted_norm(const RealFn& g, std::span<const double> breaks,
                                   const WeightParams& w, const SigmaWeight& sw,
                                   const NormResolution& res = {});

[[nodiscard]] double weighted_norm(const FunctionHandle& f, const WeightParams& w,
                                   const SigmaWeight& sw, const NormResolution& res = {});

enum class Theorem { jackson, inverse, direct, coincidence };

[[nodiscard]] std::string to_string(Theorem th);

/// True iff (p, alpha) satisfies the hypotheses of the named theorem.
[[nodiscard]] bool admissible_for(const WeightParams& w, Theorem th);

/// Fixed test corpus; labels are stable identifiers used in reports.
[[nodiscard]] const std::vector<FunctionHandle>& corpus();
/// Throws std::out_of_range for an unknown label.
[[nodiscard]] const FunctionHandle& corpus_member(std::string_view label);

/// Nominal smoothness exponent from metadata; NaN for analytic members.
[[nodiscard]] double nominal_gamma(const FunctionHandle& f);

}  // namespace wmod
