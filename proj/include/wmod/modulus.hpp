#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wmod/shift.hpp"
#include "wmod/space.hpp"

namespace wmod {

struct ModulusOptions {
    int shift_nodes = 128;
    NormResolution norm{256, 513};
    int geometric_points = 32;
    int uniform_points = 32;
    double geometric_floor = 1e-3;  ///< smallest geometric t is delta * geometric_floor
    double refine_tol = 1e-4;       ///< golden-section tolerance in t, relative to delta
    /// Whether ||tau_{-t} f - f|| = ||tau_t f - f|| may be assumed. Unset: probe the kernel.
    std::optional<bool> symmetric;
};

/// ||tau_t f - f|| in the weighted metric.
[[nodiscard]] double shift_deviation(const KernelSpec& spec, const FunctionHandle& f,
                                     const WeightParams& w, double t,
                                     const ModulusOptions& opts = {});

struct SymmetryProbe {
    double max_rel_diff = 0.0;
    bool symmetric = false;
};

/// Compares ||tau_{-t} f - f|| with ||tau_t f - f|| on a few corpus members
/// and t in {0.1, 0.4}; symmetric iff all relative differences are <= 1e-6.
[[nodiscard]] SymmetryProbe symmetry_probe(const KernelSpec& spec, const WeightParams& w,
                                           const ModulusOptions& opts = {});

/// sup_{|t| <= delta} ||tau_t f - f||: 32 geometric and 32 uniform points in
/// (0, delta], golden-section refinement around the best one, both signs of t
/// unless the kernel is symmetric. Requires 0 < delta <= 3.
[[nodiscard]] double omega(const KernelSpec& spec, const FunctionHandle& f, const WeightParams& w,
                           double delta, const ModulusOptions& opts = {});

struct ModulusCurve {
    std::vector<double> deltas;
    std::vector<double> omegas;
    std::string f_label;
    WeightParams w;
    bool both_signs = true;
};

/// omega over an increasing delta grid, sharing shift evaluations between
/// nested windows; omegas are running maxima along deltas.
[[nodiscard]] ModulusCurve modulus_curve(const KernelSpec& spec, const FunctionHandle& f,
                                         const WeightParams& w, const std::vector<double>& deltas,
                                         const ModulusOptions& opts = {});

/// "# f_label=..., p=..., alpha=..." header comments, then "delta,omega" rows.
void write_csv(std::ostream& out, const ModulusCurve& curve, const std::string& fingerprint);

}  // namespace wmod
