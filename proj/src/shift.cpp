#include "wmod/shift.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>

namespace wmod {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kEdge = 1e-9;
}  // namespace

SigmaWeight make_sigma(std::string_view form, double exponent) {
    if (!std::isfinite(exponent) || exponent <= 0.0) {
        throw KernelSpecError("sigma exponent must be a positive number");
    }
    RealFn base;
    if (form == "one_minus_u2") {
        base = [](double u) { return 1.0 - u * u; };
    } else if (form == "sqrt_one_minus_u2") {
        base = [](double u) { return std::sqrt(std::max(0.0, 1.0 - u * u)); };
    } else if (form == "one_minus_u") {
        base = [](double u) { return 1.0 - u; };
    } else if (form == "one_plus_u") {
        base = [](double u) { return 1.0 + u; };
    } else {
        throw KernelSpecError("unknown sigma form '" + std::string(form) + "'");
    }
    std::ostringstream name;
    name << form << "^" << exponent;
    if (exponent == 1.0) return {std::move(base), name.str()};
    if (exponent == 2.0) {
        return {[base](double u) {
                    const double v = base(u);
                    return v * v;
                },
                name.str()};
    }
    return {[base, exponent](double u) { return std::pow(base(u), exponent); }, name.str()};
}

CosFactor make_cosfactor(std::string_view form) {
    if (form == "squared_half_one_plus_cos") {
        return {[](double t) {
                    const double h = 0.5 * (1.0 + std::cos(t));
                    return h * h;
                },
                std::string(form)};
    }
    if (form == "unit") return {[](double) { return 1.0; }, std::string(form)};
    throw KernelSpecError("unknown cosfactor form '" + std::string(form) + "'");
}

std::string transcribed_kernel_text() {
    return "; generalized shift operator kernel\n"
           "[sigma]\n"
           "form = one_minus_u2\n"
           "exponent = 1\n"
           "\n"
           "[cosfactor]\n"
           "form = squared_half_one_plus_cos\n"
           "\n"
           "[family_x]\n"
           "a = 2\n"
           "b = 2\n"
           "\n"
           "[family_y]\n"
           "a = 0\n"
           "b = 4\n";
}

KernelSpec transcribed_kernel() { return parse_kernel_spec(transcribed_kernel_text()); }

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

namespace {

namespace pt = boost::property_tree;

double read_number(const pt::ptree& tree, const std::string& key) {
    auto v = tree.get_optional<std::string>(key);
    if (!v) throw KernelSpecError("missing key '" + key + "'");
    try {
        std::size_t used = 0;
        const double d = std::stod(*v, &used);
        if (used != v->size() || !std::isfinite(d)) throw std::invalid_argument(*v);
        return d;
    } catch (const std::exception&) {
        throw KernelSpecError("key '" + key + "' is not a number: '" + *v + "'");
    }
}

JacobiIndex read_family(const pt::ptree& tree, const std::string& section) {
    const double a = read_number(tree, section + ".a");
    const double b = read_number(tree, section + ".b");
    try {
        return JacobiIndex(a, b);
    } catch (const std::invalid_argument& e) {
        throw KernelSpecError(section + ": " + e.what());
    }
}

}  // namespace

KernelSpec parse_kernel_spec(const std::string& text) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw KernelSpecError(std::string("malformed kernel spec: ") + e.what());
    }

    static const std::map<std::string, std::set<std::string>> kAllowed = {
        {"sigma", {"form", "exponent"}},
        {"cosfactor", {"form"}},
        {"family_x", {"a", "b"}},
        {"family_y", {"a", "b"}},
    };
    for (const auto& [section, body] : tree) {
        auto it = kAllowed.find(section);
        if (it == kAllowed.end() || body.data().size() != 0) {
            throw KernelSpecError("unexpected entry '" + section + "'");
        }
        for (const auto& [key, value] : body) {
            if (!it->second.contains(key)) {
                throw KernelSpecError("unexpected key '" + section + "." + key + "'");
            }
        }
    }

    KernelSpec spec;
    auto sigma_form = tree.get_optional<std::string>("sigma.form");
    if (!sigma_form) throw KernelSpecError("missing key 'sigma.form'");
    const double exponent =
        tree.get_optional<std::string>("sigma.exponent") ? read_number(tree, "sigma.exponent") : 1.0;
    spec.sigma = make_sigma(*sigma_form, exponent);
    spec.cosfactor =
        make_cosfactor(tree.get<std::string>("cosfactor.form", "squared_half_one_plus_cos"));
    spec.idx_x = read_family(tree, "family_x");
    spec.idx_y = read_family(tree, "family_y");
    spec.fingerprint = sha256_hex(text);
    return spec;
}

KernelSpec load_kernel_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw KernelSpecError("cannot open kernel spec '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_kernel_spec(buf.str());
}

double kernel_R(double t, double x, double phi) {
    if (!(std::abs(x) <= 1.0)) throw std::domain_error("kernel_R requires |x| <= 1");
    const double r = x * std::cos(t) - std::sqrt(1.0 - x * x) * std::sin(t) * std::cos(phi);
    const double excess = std::abs(r) - 1.0;
    if (excess > 1e-15) throw std::logic_error("kernel_R: |R| exceeds 1");
    return std::clamp(r, -1.0, 1.0);
}

double kernel_B(const KernelSpec& spec, double y, double x, double z, double r) {
    const double sx = std::sqrt(std::max(0.0, 1.0 - x * x));
    const double sy = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double inner = sx * y + x * z * sy + sx * (1.0 - y) * spec.sigma(z);
    const double b = 2.0 * inner * inner - spec.sigma(r);
    if (!std::isfinite(b)) throw std::domain_error("kernel_B: non-finite value");
    return b;
}

double kernel_B(const KernelSpec& spec, double y, double x, double z) {
    for (double v : {x, y, z}) {
        if (!(std::abs(v) <= 1.0)) throw std::domain_error("kernel_B requires |x|,|y|,|z| <= 1");
    }
    const double r = std::clamp(
        x * y - std::sqrt(1.0 - x * x) * std::sqrt(1.0 - y * y) * z, -1.0, 1.0);
    return kernel_B(spec, y, x, z, r);
}

namespace {

const std::vector<double>& midpoint_cosines(int m) {
    static std::mutex mutex;
    static std::map<int, std::vector<double>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    std::vector<double> z(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) z[static_cast<std::size_t>(k)] = std::cos((2.0 * k + 1.0) * kPi / (2.0 * m));
    return cache.emplace(m, std::move(z)).first->second;
}

}  // namespace

double shift_quadrature(const KernelSpec& spec, const FunctionHandle& f, double t, double x,
                        int nodes) {
    if (nodes < 1) throw std::invalid_argument("shift needs at least one node");
    if (!(std::abs(x) < 1.0 - kEdge)) {
        throw std::domain_error("shift is defined for |x| < 1 - 1e-9");
    }
    const double co = spec.cosfactor(t);
    if (!(co >= 1e-12)) throw std::domain_error("cosine factor below 1e-12");
    const double sig_x = spec.sigma(x);
    if (!(sig_x > 0.0)) throw std::domain_error("sigma(x) must be positive");

    // tau_y form with y = cos t: the operator depends on t only through y.
    const double y = std::cos(t);
    const double sy = std::abs(std::sin(t));  // sqrt(1 - y^2)
    const double sx = std::sqrt(1.0 - x * x);
    const double amp = sx * sy;  // R(z) = x y - amp z, z = cos(phi)
    const double xy = x * y;

    auto term = [&](double z) {
        const double r = std::clamp(xy - amp * z, -1.0, 1.0);
        const double inner = sx * y + x * z * sy + sx * (1.0 - y) * spec.sigma(z);
        return (2.0 * inner * inner - spec.sigma(r)) * f.eval(r);
    };

    std::vector<double> cuts;
    if (amp != 0.0) {
        for (double s : f.breakpoints) {
            const double c = (xy - s) / amp;
            if (c > -1.0 && c < 1.0) cuts.push_back(std::acos(c));
        }
    }

    CompensatedSum sum;
    double integral = 0.0;
    if (cuts.empty()) {
        for (double z : midpoint_cosines(nodes)) sum.add(term(z));
        integral = sum.value() * (kPi / nodes);
    } else {
        const int pieces = static_cast<int>(cuts.size()) + 1;
        const int per_piece = std::max(16, nodes / pieces);
        const QuadratureRule rule = graded_rule(0.0, kPi, cuts, per_piece);
        for (std::size_t i = 0; i < rule.size(); ++i) {
            sum.add(rule.weights[i] * term(std::cos(rule.nodes[i])));
        }
        integral = sum.value();
    }
    const double value = integral / (kPi * sig_x * co);
    if (!std::isfinite(value)) throw std::domain_error("non-finite shift value");
    return value;
}

double shift_fixed(const KernelSpec& spec, const FunctionHandle& f, double t, double x,
                   int nodes) {
    if (t == 0.0) return f.eval(x);
    return shift_quadrature(spec, f, t, x, nodes);
}

double apply_shift(const KernelSpec& spec, const FunctionHandle& f, double t, double x,
                   int nodes) {
    if (t == 0.0) return f.eval(x);
    double prev = shift_quadrature(spec, f, t, x, nodes);
    int m = nodes;
    for (int k = 0; k < 4; ++k) {
        m *= 2;
        const double next = shift_quadrature(spec, f, t, x, m);
        if (std::abs(next - prev) <= 1e-9 * std::max(1.0, std::abs(next))) return next;
        prev = next;
    }
    std::ostringstream msg;
    msg << "shift of " << f.label << " at t=" << t << ", x=" << x
        << " did not converge under resolution doubling";
    throw ConvergenceError(msg.str());
}

namespace {

std::vector<double> shifted_breakpoints(const FunctionHandle& f, double t, bool include_own) {
    std::vector<double> out;
    for (double s : f.breakpoints) {
        const double theta = std::acos(std::clamp(s, -1.0, 1.0));
        for (double v : {std::cos(theta - t), std::cos(theta + t)}) {
            if (v > -1.0 && v < 1.0) out.push_back(v);
        }
        if (include_own) out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double clamp_interior(double x) { return std::clamp(x, -1.0 + kEdge * 1.01, 1.0 - kEdge * 1.01); }

}  // namespace

FunctionHandle shifted(const KernelSpec& spec, const FunctionHandle& f, double t, int nodes) {
    FunctionHandle out;
    out.label = "shift(" + f.label + ")";
    out.breakpoints = shifted_breakpoints(f, t, false);
    out.eval = [spec, f, t, nodes](double x) {
        return shift_fixed(spec, f, t, clamp_interior(x), nodes);
    };
    return out;
}

FunctionHandle shift_difference(const KernelSpec& spec, const FunctionHandle& f, double t,
                                int nodes) {
    FunctionHandle out;
    out.label = "shift_diff(" + f.label + ")";
    out.breakpoints = shifted_breakpoints(f, t, true);
    out.eval = [spec, f, t, nodes](double x) {
        const double xc = clamp_interior(x);
        return shift_fixed(spec, f, t, xc, nodes) - f.eval(x);
    };
    return out;
}

SelftestReport lemma1_selftest(const KernelSpec& spec) {
    SelftestReport report;
    constexpr int kGrid = 20;
    constexpr int kProductGrid = 12;
    constexpr int kMaxDegree = 8;
    constexpr int kNodes = 128;

    auto chebyshev_x = [](int count, int i) {
        return std::cos((2.0 * i + 1.0) * kPi / (2.0 * count));
    };

    auto track = [](double& slot, double err) {
        slot = std::isfinite(err) ? std::max(slot, err) : kInf;
    };

    try {
        // tau_1 f = f: the quadrature path at y = 1 on 20 functions x 20 points.
        std::vector<FunctionHandle> probes = corpus();
        for (int nu = 0; static_cast<int>(probes.size()) < kGrid; ++nu) {
            const JacobiIndex idx = spec.idx_x;
            probes.push_back({[idx, nu](double x) { return eval_jacobi(idx, nu, x); },
                              "jacobi_x_" + std::to_string(nu), {}, {}});
        }
        for (const auto& f : probes) {
            for (int i = 0; i < kGrid; ++i) {
                const double x = chebyshev_x(kGrid, i);
                track(report.max_err_identity, std::abs(shift_quadrature(spec, f, 0.0, x, kNodes) - f(x)));
            }
        }

        // tau_y 1 = 1 on a 20 x 20 (t, x) grid, t in (0, 3].
        const FunctionHandle one = constant_function(1.0);
        for (int j = 1; j <= kGrid; ++j) {
            const double t = 3.0 * j / kGrid;
            for (int i = 0; i < kGrid; ++i) {
                const double x = chebyshev_x(kGrid, i);
                track(report.max_err_unit, std::abs(shift_quadrature(spec, one, t, x, kNodes) - 1.0));
            }
        }

        // tau_y(P_nu^x, x) = P_nu^x(x) P_nu^y(y) on a 12 x 12 grid.
        for (int nu = 0; nu <= kMaxDegree; ++nu) {
            const JacobiIndex idx = spec.idx_x;
            const FunctionHandle p{[idx, nu](double x) { return eval_jacobi(idx, nu, x); },
                                   "jacobi_x", {}, {}};
            for (int j = 1; j <= kProductGrid; ++j) {
                const double t = 3.0 * j / kProductGrid;
                const double py = eval_jacobi(spec.idx_y, nu, std::cos(t));
                for (int i = 0; i < kProductGrid; ++i) {
                    const double x = chebyshev_x(kProductGrid, i);
                    const double expected = p(x) * py;
                    track(report.max_err_product,
                          std::abs(shift_quadrature(spec, p, t, x, kNodes) - expected));
                }
            }
        }
    } catch (const std::exception&) {
        report.pass = false;
        return report;
    }

    report.pass = report.max_err_identity <= kSelftestTolerance &&
                  report.max_err_unit <= kSelftestTolerance &&
                  report.max_err_product <= kSelftestTolerance;
    return report;
}

double operator_norm_probe(const KernelSpec& spec, const WeightParams& w,
                           const std::vector<FunctionHandle>& functions,
                           const NormProbeOptions& opts) {
    if (!admissible_for(w, Theorem::jackson)) {
        throw std::invalid_argument("operator_norm_probe: (p, alpha) outside the admissible range");
    }
    double best = 0.0;
    for (const auto& f : functions) {
        const double base = weighted_norm(f, w, spec.sigma, opts.norm);
        if (!(base > 0.0)) continue;
        for (int k = 0; k <= 20; ++k) {
            const double t = 0.3 * (k - 10);
            const FunctionHandle g = shifted(spec, f, t, opts.shift_nodes);
            const double ratio = weighted_norm(g, w, spec.sigma, opts.norm) * spec.cosfactor(t) / base;
            best = std::max(best, ratio);
        }
    }
    return best;
}

}  // namespace wmod
