#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wmod/polybasis.hpp"
#include "wmod/space.hpp"

namespace wmod {

/// Normalizing factor of the shift operator as a function of t.
struct CosFactor {
    RealFn fn;
    std::string name;

    double operator()(double t) const { return fn(t); }
};

/// Ingredients of the generalized shift operator: the weight-generating
/// function sigma, the cosine factor, and the index pairs of the two Jacobi
/// families in the product formula tau_y(P_n^x, x) = P_n^x(x) P_n^y(y).
struct KernelSpec {
    SigmaWeight sigma;
    CosFactor cosfactor;
    JacobiIndex idx_x;
    JacobiIndex idx_y;
    std::string fingerprint;  ///< SHA-256 of the source document
};

/// Malformed or unreadable kernel specification.
class KernelSpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// apply_shift failed to settle under resolution doubling.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// sigma(u) = base(u)^exponent for a named base:
/// one_minus_u2, sqrt_one_minus_u2, one_minus_u, one_plus_u.
[[nodiscard]] SigmaWeight make_sigma(std::string_view form, double exponent);
/// squared_half_one_plus_cos: ((1 + cos t) / 2)^2; unit: 1 (negative control only).
[[nodiscard]] CosFactor make_cosfactor(std::string_view form);

/// Canonical document of the transcribed operator.
[[nodiscard]] std::string transcribed_kernel_text();
/// sigma(u) = 1 - u^2, Co(t) = ((1 + cos t)/2)^2, families (2,2) and (0,4).
[[nodiscard]] KernelSpec transcribed_kernel();

/// Parses the INI-style kernel document. Throws KernelSpecError.
[[nodiscard]] KernelSpec parse_kernel_spec(const std::string& text);
/// Reads and parses a kernel file. Throws KernelSpecError (also for I/O failures).
[[nodiscard]] KernelSpec load_kernel_spec(const std::string& path);

[[nodiscard]] std::string sha256_hex(std::string_view bytes);

/// R = x cos t - sqrt(1-x^2) sin t cos phi. Throws std::logic_error if
/// |R| exceeds 1 by more than 1e-15 (otherwise clamps).
[[nodiscard]] double kernel_R(double t, double x, double phi);

/// B_y(x, z, R) with R = x y - sqrt(1-x^2) sqrt(1-y^2) z.
[[nodiscard]] double kernel_B(const KernelSpec& spec, double y, double x, double z);
/// B_y(x, z, R) for an explicitly supplied R.
[[nodiscard]] double kernel_B(const KernelSpec& spec, double y, double x, double z, double r);

inline constexpr int kDefaultShiftNodes = 256;

/// The shift integral at fixed resolution, never short-circuited at t = 0.
/// Smooth f uses the midpoint rule in phi (Gauss-Chebyshev in z = cos phi);
/// f with breakpoints is integrated piecewise between the phi where R
/// crosses a breakpoint, `nodes` graded Gauss points in total.
[[nodiscard]] double shift_quadrature(const KernelSpec& spec, const FunctionHandle& f, double t,
                                      double x, int nodes = kDefaultShiftNodes);

/// shift_quadrature with the exact t = 0 identity.
[[nodiscard]] double shift_fixed(const KernelSpec& spec, const FunctionHandle& f, double t,
                                 double x, int nodes = kDefaultShiftNodes);

/// Convergence-checked shift: doubles the resolution up to four times until
/// successive values agree to 1e-9; throws ConvergenceError otherwise.
[[nodiscard]] double apply_shift(const KernelSpec& spec, const FunctionHandle& f, double t,
                                 double x, int nodes = kDefaultShiftNodes);

/// x -> tau_t(f, x) as a function handle at fixed resolution. Arguments with
/// |x| > 1 - 1e-9 are evaluated at the clamped point.
[[nodiscard]] FunctionHandle shifted(const KernelSpec& spec, const FunctionHandle& f, double t,
                                     int nodes = kDefaultShiftNodes);

/// x -> tau_t(f, x) - f(x).
[[nodiscard]] FunctionHandle shift_difference(const KernelSpec& spec, const FunctionHandle& f,
                                              double t, int nodes = kDefaultShiftNodes);

struct SelftestReport {
    double max_err_identity = 0.0;
    double max_err_unit = 0.0;
    double max_err_product = 0.0;
    bool pass = false;
};

inline constexpr double kSelftestTolerance = 1e-8;

/// Certifies a kernel against the operator's defining identities:
/// tau_1 f = f, tau_y 1 = 1 on a 20x20 grid and the product formula for
/// degrees <= 8 on a 12x12 grid. Failures are reported, never thrown.
[[nodiscard]] SelftestReport lemma1_selftest(const KernelSpec& spec);

struct NormProbeOptions {
    int shift_nodes = kDefaultShiftNodes;
    NormResolution norm{512, 769};
};

/// max over f and 21 t in [-3, 3] of ||tau_t f|| Co(t) / ||f||.
/// Throws std::invalid_argument unless admissible_for(w, jackson).
[[nodiscard]] double operator_norm_probe(const KernelSpec& spec, const WeightParams& w,
                                         const std::vector<FunctionHandle>& functions,
                                         const NormProbeOptions& opts = {});

}  // namespace wmod
