#pragma once

#include <functional>
#include <string>

namespace wmod {

struct LineMax {
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section search on [lo, hi]: the best sample and where it was taken.
/// value is +infinity if h produced a non-finite value.
[[nodiscard]] LineMax golden_section_argmax(const std::function<double(double)>& h, double lo,
                                            double hi, double tol, int max_iter = 100);

/// Golden-section search for the maximum of h on [lo, hi]. Returns the best
/// value seen (endpoints excluded); +infinity if h produced a non-finite value.
[[nodiscard]] double golden_section_max(const std::function<double(double)>& h, double lo,
                                        double hi, double tol, int max_iter = 100);

/// Shortest decimal text that round-trips to the same double.
[[nodiscard]] std::string format_real(double v);

}  // namespace wmod
