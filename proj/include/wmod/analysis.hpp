#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmod/approx.hpp"
#include "wmod/modulus.hpp"
#include "wmod/shift.hpp"
#include "wmod/space.hpp"

namespace wmod {

enum class RateDirection { decay_in_n, growth_in_delta };

struct RateEstimate {
    double lambda = 0.0;
    double constant = 0.0;  ///< smallest C with y <= C x^{-lambda} (decay) or y <= C x^lambda (growth)
    double residual = 0.0;  ///< max |log y - fitted log y|
    double x_lo = 0.0;      ///< fitted window
    double x_hi = 0.0;
    std::size_t points = 0;
};

/// Least-squares line through (log x, log y) after dropping zero ys.
/// Throws std::invalid_argument for fewer than 4 nonzero points, mismatched
/// lengths or non-positive xs.
[[nodiscard]] RateEstimate estimate_rate(std::span<const double> xs, std::span<const double> ys,
                                         RateDirection direction);

/// a_n(f) = int f(x) P_n(x) sigma(x)^2 dx with P_n from the idx_x family,
/// on graded rules split at the breakpoints of f, doubled until stable.
/// Throws ConvergenceError.
[[nodiscard]] double fourier_jacobi_coeff(const FunctionHandle& f, int n, const KernelSpec& spec);

/// a_0(f), ..., a_nmax(f) from one rule with `per_piece` nodes per piece.
[[nodiscard]] std::vector<double> fourier_jacobi_coeffs(const FunctionHandle& f, int nmax,
                                                        const KernelSpec& spec, int per_piece);

struct MultiplierRow {
    std::string f_label;
    int n = 0;
    double y = 0.0;
    double coeff = 0.0;          ///< a_n(f)
    double shifted_coeff = 0.0;  ///< a_n(tau_y f)
    double multiplier = 0.0;     ///< P_n(y) from the idx_y family
    double rel_err = 0.0;        ///< |a_n(tau_y f) - a_n(f) P_n(y)| / |a_n(f)|
    bool skipped = false;        ///< a_n(f) vanishes (parity); not compared
};

struct MultiplierReport {
    std::vector<MultiplierRow> rows;
    double max_rel_err = 0.0;
    double tolerance = 1e-6;
    bool pass = false;
};

/// Checks a_n(tau_y f) = a_n(f) P_n(y) for n <= nmax and each y. Coefficients
/// with |a_n(f)| <= 1e-9 max_k |a_k(f)| are skipped.
[[nodiscard]] MultiplierReport multiplier_check(const KernelSpec& spec,
                                                const std::vector<FunctionHandle>& functions,
                                                int nmax = 8,
                                                const std::vector<double>& ys = {-0.5, 0.0, 0.5, 0.9},
                                                double tolerance = 1e-6);

/// Corpus members used by the multiplier check.
[[nodiscard]] std::vector<FunctionHandle> multiplier_members();

struct StudyOptions {
    ApproxOptions approx{};
    ModulusOptions modulus{};
};

/// E_n(f) and omega(f, 1/n) on a common n grid, shared by all checks.
struct FunctionStudy {
    std::string f_label;
    WeightParams w;
    std::vector<int> n_values;
    ErrorSequence errors;
    std::vector<double> omegas;  ///< omega(f, 1/n), aligned with n_values
};

/// n_values increasing, all >= 1.
[[nodiscard]] FunctionStudy study_function(const KernelSpec& spec, const FunctionHandle& f,
                                           const WeightParams& w, const std::vector<int>& n_values,
                                           const StudyOptions& opts = {});

/// 2, 3, ..., n_max.
[[nodiscard]] std::vector<int> default_n_values(int n_max = 64);

struct JacksonReport {
    std::string f_label;
    WeightParams w;
    std::vector<int> n_values;
    std::vector<double> ratios;  ///< E_n / omega(f, 1/n); NaN where omega = 0
    double max_ratio = 0.0;
    double early_max = 0.0;  ///< n in [2, 32]
    double late_max = 0.0;   ///< n in [33, 64]
    bool pass = false;
};

inline constexpr double kJacksonGrowth = 1.2;

/// Throws std::invalid_argument unless admissible_for(study.w, jackson).
[[nodiscard]] JacksonReport verify_jackson(const FunctionStudy& study);
[[nodiscard]] JacksonReport verify_jackson(const KernelSpec& spec, const FunctionHandle& f,
                                           const WeightParams& w, const std::vector<int>& n_values,
                                           const StudyOptions& opts = {});

enum class CheckStatus { pass, fail, degenerate_pass, out_of_hypothesis };

[[nodiscard]] std::string to_string(CheckStatus s);

inline constexpr double kRateTolerance = 0.15;
inline constexpr int kFitLo = 4;
inline constexpr int kFitHi = 64;

struct RateCheck {
    std::string f_label;
    WeightParams w;
    Theorem theorem = Theorem::inverse;
    CheckStatus status = CheckStatus::out_of_hypothesis;
    std::optional<RateEstimate> lambda_E;
    std::optional<RateEstimate> lambda_H;
    double tolerance = kRateTolerance;
    std::string note;
};

/// Inverse estimate: with lambda_E in (0, 2) fitted on n in [4, 64],
/// pass iff lambda_H >= lambda_E - tolerance.
[[nodiscard]] RateCheck verify_inverse(const FunctionStudy& study, double tolerance = kRateTolerance);
/// Direct estimate: with lambda_H in (0, 2), pass iff lambda_E >= lambda_H - tolerance.
[[nodiscard]] RateCheck verify_direct(const FunctionStudy& study, double tolerance = kRateTolerance);

[[nodiscard]] RateCheck verify_inverse(const KernelSpec& spec, const FunctionHandle& f,
                                       const WeightParams& w, const StudyOptions& opts = {});
[[nodiscard]] RateCheck verify_direct(const KernelSpec& spec, const FunctionHandle& f,
                                      const WeightParams& w, const StudyOptions& opts = {});

struct ClassMembershipReport {
    std::string f_label;
    WeightParams w;
    std::optional<RateEstimate> lambda_E;
    std::optional<RateEstimate> lambda_H;
    bool in_hypothesis = false;  ///< lambda_E fitted and inside (0.2, 1.8)
    bool coincide = false;
    double tolerance = kRateTolerance;
    std::string note;
};

[[nodiscard]] ClassMembershipReport class_membership(const FunctionStudy& study,
                                                     double tolerance = kRateTolerance);

/// Throws std::invalid_argument unless admissible_for(w, coincidence).
[[nodiscard]] std::vector<ClassMembershipReport> verify_coincidence(
    const KernelSpec& spec, const WeightParams& w, const std::vector<FunctionHandle>& functions,
    const StudyOptions& opts = {}, double tolerance = kRateTolerance);

/// Every check for one function at one weight; checks whose hypotheses on
/// (p, alpha) fail are absent.
struct FunctionVerdict {
    FunctionStudy study;
    std::optional<JacksonReport> jackson;
    std::optional<RateCheck> inverse;
    std::optional<RateCheck> direct;
    std::optional<ClassMembershipReport> coincidence;
};

/// Studies the functions concurrently (up to `threads` at a time, 0 = hardware
/// concurrency) and returns verdicts in input order.
[[nodiscard]] std::vector<FunctionVerdict> verify_all(const KernelSpec& spec, const WeightParams& w,
                                                      const std::vector<FunctionHandle>& functions,
                                                      const std::vector<int>& n_values,
                                                      const StudyOptions& opts = {},
                                                      unsigned threads = 0);

/// True iff no in-hypothesis check failed.
[[nodiscard]] bool all_pass(const FunctionVerdict& v);

}  // namespace wmod
