#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wmod/space.hpp"

namespace wmod {

/// Polynomial in the Chebyshev (first kind) basis, sum_j coeffs[j] T_j(x).
struct PolyCoeffs {
    std::vector<double> coeffs{0.0};

    [[nodiscard]] int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    /// Clenshaw recurrence.
    [[nodiscard]] double operator()(double x) const;
};

/// Weighted least-squares system was rank deficient.
class RankDeficiencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ApproxOptions {
    int max_iterations = 500;
    double stagnation_tol = 1e-9;
    double gap_tol = 1e-6;  ///< Lawson stops once (upper - lower) <= gap_tol * upper
    /// Lawson iteration at which a discrete exchange step is tried from the
    /// current reference; 0 disables it.
    int exchange_after = 40;
    /// p = infinity: rounds of adding the continuous local maxima of the
    /// residual to the grid and re-levelling; 0 disables it.
    int refine_rounds = 4;
    NormResolution norm{};  ///< resolution of the reported error
    /// Grid density: density_slope * n + density_offset Chebyshev intervals.
    int density_slope = 8;
    int density_offset = 64;
};

struct ApproxResult {
    PolyCoeffs poly;
    double error = 0.0;       ///< ||f - poly|| in the continuous weighted norm
    double grid_error = 0.0;  ///< the same on the discretization grid
    int iterations = 0;
    bool converged = true;
};

/// Best approximation by polynomials of degree <= n-1 in the weighted L_p
/// metric. p = 2: one weighted least-squares solve; p = infinity: Lawson's
/// iteratively reweighted least squares, finished by a discrete exchange
/// step once Lawson has located the alternation set; other p: IRLS with weights
/// |r|^(p-2), damped by 0.5 for p < 2. Errors at the level of rounding
/// (<= 1e-12 ||f||) are reported as exactly 0.
/// Throws std::invalid_argument for n < 1, RankDeficiencyError if the grid
/// cannot support degree n-1.
[[nodiscard]] ApproxResult best_approx(const FunctionHandle& f, int n, const WeightParams& w,
                                       const SigmaWeight& sw, const ApproxOptions& opts = {});

/// Warm-started variant: `start` (a previous approximant) seeds the Lawson/IRLS weights.
[[nodiscard]] ApproxResult best_approx(const FunctionHandle& f, int n, const WeightParams& w,
                                       const SigmaWeight& sw, const ApproxOptions& opts,
                                       const PolyCoeffs* start);

struct ErrorSequence {
    std::vector<int> n_values;
    std::vector<double> errors;
    std::vector<bool> converged;
    std::vector<std::string> failures;  ///< per row; empty when the solve succeeded
    std::string f_label;
    WeightParams w;
};

/// best_approx over increasing n, warm-starting each degree from the previous
/// approximant; errors are running minima (P_{n-1} is admissible for n).
/// A degree whose solve throws gets error NaN and its message in `failures`.
[[nodiscard]] ErrorSequence error_sequence(const FunctionHandle& f, const std::vector<int>& n_values,
                                           const WeightParams& w, const SigmaWeight& sw,
                                           const ApproxOptions& opts = {});

/// "# f_label=..." header comments, then "n,E_n" rows, then one
/// "# failed n=...: ..." comment per failed row.
void write_csv(std::ostream& out, const ErrorSequence& seq, const std::string& fingerprint);

}  // namespace wmod
