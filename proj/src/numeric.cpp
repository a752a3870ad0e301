#include "wmod/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace wmod {

LineMax golden_section_argmax(const std::function<double(double)>& h, double lo, double hi,
                              double tol, int max_iter) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = h(c);
    double fd = h(d);
    LineMax best = fc >= fd ? LineMax{c, fc} : LineMax{d, fd};
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (!std::isfinite(best.value)) break;
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = h(c);
            if (fc > best.value || !std::isfinite(fc)) best = {c, fc};
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = h(d);
            if (fd > best.value || !std::isfinite(fd)) best = {d, fd};
        }
    }
    if (!std::isfinite(best.value)) best.value = std::numeric_limits<double>::infinity();
    return best;
}

double golden_section_max(const std::function<double(double)>& h, double lo, double hi,
                          double tol, int max_iter) {
    return golden_section_argmax(h, lo, hi, tol, max_iter).value;
}

std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

}  // namespace wmod
