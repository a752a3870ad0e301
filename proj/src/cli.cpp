#include "wmod/cli.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <thread>

#include "wmod/approx.hpp"
#include "wmod/modulus.hpp"
#include "wmod/numeric.hpp"
#include "wmod/report.hpp"

namespace wmod::cli {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double parse_double(const std::string& text, const std::string& what) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw ConfigError(what + ": not a number: '" + text + "'");
    }
    return v;
}

int parse_int(const std::string& text, const std::string& what) {
    int v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ConfigError(what + ": not an integer: '" + text + "'");
    }
    return v;
}

WeightParams parse_weight(const std::string& word) {
    const auto colon = word.find(':');
    if (colon == std::string::npos) {
        throw ConfigError("weights: expected P:ALPHA, got '" + word + "'");
    }
    try {
        return WeightParams(parse_p(word.substr(0, colon)),
                            parse_double(word.substr(colon + 1), "weights"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("weights: ") + e.what());
    }
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"kernel", {"spec"}},
        {"run", {"weights", "functions", "n_max", "delta_grid", "output_dir", "threads"}},
        {"resolution",
         {"scale", "shift_nodes", "norm_nodes", "sup_samples", "density_slope", "density_offset",
          "max_iterations"}},
    };
    return keys;
}

bool is_constant_label(const std::string& label) { return label.rfind("const_", 0) == 0; }

FunctionHandle constant_from_label(const std::string& label) {
    FunctionHandle f = constant_function(parse_double(label.substr(6), "functions"));
    f.label = label;
    return f;
}

void check_functions(const std::vector<std::string>& labels) {
    for (const auto& label : labels) {
        if (is_constant_label(label)) {
            (void)constant_from_label(label);
            continue;
        }
        try {
            (void)corpus_member(label);
        } catch (const std::out_of_range& e) {
            throw ConfigError(std::string("functions: ") + e.what());
        }
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        auto known = known_keys().find(section);
        if (known == known_keys().end()) throw ConfigError("config: unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            if (!known->second.contains(key)) {
                throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
            }
        }
    }

    RunConfig c;
    const std::string spec = tree.get<std::string>("kernel.spec", "builtin");
    c.kernel_spec_path = spec == "builtin" ? spec : (base_dir / spec).string();

    for (const auto& word : split_words(tree.get<std::string>("run.weights", "inf:1"))) {
        c.weights.push_back(parse_weight(word));
    }
    if (c.weights.empty()) throw ConfigError("weights: at least one weight is required");

    const std::vector<std::string> fns = split_words(tree.get<std::string>("run.functions", "all"));
    if (fns.size() == 1 && fns.front() == "all") {
        for (const auto& f : corpus()) c.functions.push_back(f.label);
    } else {
        c.functions = fns;
    }
    if (c.functions.empty()) throw ConfigError("functions: list is empty");
    check_functions(c.functions);

    c.n_max = parse_int(tree.get<std::string>("run.n_max", "64"), "n_max");
    if (c.n_max < 4 || c.n_max > kMaxN) {
        throw ConfigError("n_max must lie in [4, " + std::to_string(kMaxN) + "]");
    }
    c.delta_grid = tree.get<std::string>("run.delta_grid", "reciprocal");
    c.output_dir = base_dir / tree.get<std::string>("run.output_dir", "wmod-out");
    const int threads = parse_int(tree.get<std::string>("run.threads", "0"), "threads");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    c.threads = static_cast<unsigned>(threads);

    if (auto res = tree.get_child_optional("resolution")) {
        for (const auto& [key, value] : *res) {
            if (key == "scale") {
                c.resolution = parse_int(value.data(), "scale");
                if (c.resolution < 1 || c.resolution > 16) throw ConfigError("scale must lie in [1, 16]");
            } else {
                const double v = parse_double(value.data(), key);
                if (!(v >= 1.0) || v != std::floor(v)) {
                    throw ConfigError(key + " must be a positive integer");
                }
                c.overrides[key] = v;
            }
        }
    }
    (void)delta_values(c);
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.parent_path());
}

std::vector<double> delta_values(const RunConfig& config) {
    std::vector<double> out;
    const std::vector<std::string> words = split_words(config.delta_grid);
    if (words.empty()) throw ConfigError("delta_grid is empty");
    if (words.front() == "reciprocal") {
        if (words.size() != 1) throw ConfigError("delta_grid: 'reciprocal' takes no arguments");
        for (int n = config.n_max; n >= 2; --n) out.push_back(1.0 / n);
    } else if (words.front() == "geometric") {
        if (words.size() != 4) throw ConfigError("delta_grid: expected 'geometric LO HI COUNT'");
        const double lo = parse_double(words[1], "delta_grid");
        const double hi = parse_double(words[2], "delta_grid");
        const int count = parse_int(words[3], "delta_grid");
        if (!(lo > 0.0) || !(hi > lo) || count < 2) {
            throw ConfigError("delta_grid: need 0 < LO < HI and COUNT >= 2");
        }
        for (int k = 0; k < count; ++k) {
            out.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
        }
        out.back() = hi;
    } else {
        for (const auto& w : words) out.push_back(parse_double(w, "delta_grid"));
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(out[i] > 0.0) || !(out[i] <= 3.0) || (i > 0 && !(out[i] > out[i - 1]))) {
            throw ConfigError("delta_grid: values must increase within (0, 3]");
        }
    }
    return out;
}

std::vector<int> n_values(const RunConfig& config) {
    std::vector<int> ns;
    for (int n = 1; n <= config.n_max; ++n) ns.push_back(n);
    return ns;
}

std::vector<FunctionHandle> resolve_functions(const RunConfig& config) {
    std::vector<FunctionHandle> out;
    for (const auto& label : config.functions) {
        out.push_back(is_constant_label(label) ? constant_from_label(label) : corpus_member(label));
    }
    return out;
}

KernelSpec resolve_kernel(const RunConfig& config) {
    if (config.kernel_spec_path == "builtin") return transcribed_kernel();
    return load_kernel_spec(config.kernel_spec_path);
}

StudyOptions study_options(const RunConfig& config) {
    StudyOptions o;
    const int k = config.resolution;
    auto get = [&](const char* key, int fallback) {
        auto it = config.overrides.find(key);
        return it == config.overrides.end() ? fallback : static_cast<int>(it->second);
    };
    o.modulus.shift_nodes = k * get("shift_nodes", o.modulus.shift_nodes);
    o.modulus.norm.quad_nodes = k * get("norm_nodes", o.modulus.norm.quad_nodes);
    o.modulus.norm.sup_samples = k * (get("sup_samples", o.modulus.norm.sup_samples) - 1) + 1;
    o.approx.norm.quad_nodes = k * o.approx.norm.quad_nodes;
    o.approx.norm.sup_samples = k * (o.approx.norm.sup_samples - 1) + 1;
    o.approx.density_slope = get("density_slope", o.approx.density_slope);
    o.approx.density_offset = get("density_offset", o.approx.density_offset);
    o.approx.max_iterations = get("max_iterations", o.approx.max_iterations);
    return o;
}

std::string weight_tag(const WeightParams& w) {
    return "p-" + format_p(w.p) + "_alpha-" + format_real(w.alpha);
}

namespace {

void prepare_output(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw ConfigError("cannot create output directory '" + dir.string() + "'");
    }
    const fs::path probe = dir / ".write-probe";
    {
        std::ofstream out(probe);
        if (!out) throw ConfigError("output directory '" + dir.string() + "' is not writable");
    }
    fs::remove(probe, ec);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("failed to write '" + path.string() + "'");
}

void require_stamp(const RunConfig& config, const KernelSpec& spec, bool force) {
    if (force) return;
    std::ifstream in(config.output_dir / kStampFile);
    std::string fp;
    if (!(in >> fp) || fp != spec.fingerprint) {
        throw ConfigError("no passing selftest recorded for this kernel in '" +
                          config.output_dir.string() + "'; run 'selftest' first or pass --force");
    }
}

// Runs body() and maps configuration problems to exit code 2.
template <class Body>
int guarded(std::ostream& log, Body body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
    } catch (const KernelSpecError& e) {
        log << "error: kernel spec: " << e.what() << "\n";
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kCheckFailed;
    }
    return kUsageError;
}

template <class T, class Fn>
std::vector<T> ordered_map(std::size_t count, unsigned threads, Fn fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<T>> pending(count);
    std::vector<T> out;
    out.reserve(count);
    std::size_t next = 0;
    for (std::size_t done = 0; done < count; ++done) {
        while (next < count && next < done + threads) {
            pending[next] = std::async(std::launch::async, fn, next);
            ++next;
        }
        out.push_back(pending[done].get());
    }
    return out;
}

struct CurveFiles {
    std::string label;
    std::string errors_csv;
    std::string modulus_csv;
    ErrorSequence errors;
    ModulusCurve modulus;
    std::string failure;
};

std::string gnuplot_data(const std::vector<CurveFiles>& curves, bool modulus,
                         const std::string& fingerprint) {
    std::ostringstream out;
    out << "# kernel=" << fingerprint << "\n";
    for (const auto& c : curves) {
        out << "\"" << c.label << "\"\n";
        if (modulus) {
            for (std::size_t i = 0; i < c.modulus.deltas.size(); ++i) {
                out << format_real(c.modulus.deltas[i]) << " " << format_real(c.modulus.omegas[i])
                    << "\n";
            }
        } else {
            for (std::size_t i = 0; i < c.errors.n_values.size(); ++i) {
                out << c.errors.n_values[i] << " " << format_real(c.errors.errors[i]) << "\n";
            }
        }
        out << "\n\n";
    }
    return out.str();
}

std::string gnuplot_script(const std::string& tag, std::size_t count) {
    std::ostringstream out;
    out << "# gnuplot " << tag << ".gp\n"
        << "set terminal pngcairo size 1200,500\n"
        << "set output '" << tag << ".png'\n"
        << "set multiplot layout 1,2\n"
        << "set logscale xy\n"
        << "set key left top font ',8'\n"
        << "set title 'E_n, " << tag << "'\nset xlabel 'n'\n"
        << "plot for [i=0:" << count - 1 << "] 'E_" << tag
        << ".dat' index i using 1:2 with linespoints title columnheader(1)\n"
        << "set title 'omega(f, delta), " << tag << "'\nset xlabel 'delta'\n"
        << "plot for [i=0:" << count - 1 << "] 'omega_" << tag
        << ".dat' index i using 1:2 with linespoints title columnheader(1)\n"
        << "unset multiplot\n";
    return out.str();
}

}  // namespace

int cmd_selftest(const RunConfig& config, std::ostream& log) {
    return guarded(log, [&] {
        const KernelSpec spec = resolve_kernel(config);
        prepare_output(config.output_dir);
        log << "selftest: kernel " << spec.fingerprint << "\n";
        const SelftestReport st = lemma1_selftest(spec);
        log << "  identity " << format_real(st.max_err_identity) << ", unit "
            << format_real(st.max_err_unit) << ", product " << format_real(st.max_err_product)
            << (st.pass ? "  pass\n" : "  FAIL\n");

        Json report = {{"kernel", spec.fingerprint},
                       {"kernel_spec", config.kernel_spec_path},
                       {"lemma1", to_json(st)}};
        Json probes = Json::array();
        if (st.pass) {
            NormProbeOptions po;
            po.shift_nodes *= config.resolution;
            po.norm.quad_nodes *= config.resolution;
            po.norm.sup_samples = config.resolution * (po.norm.sup_samples - 1) + 1;
            const std::vector<FunctionHandle> fns = resolve_functions(config);
            for (const auto& w : config.weights) {
                if (!admissible_for(w, Theorem::jackson)) {
                    probes.push_back({{"w", to_json(w)}, {"status", "out_of_hypothesis"}});
                    continue;
                }
                const double bound = operator_norm_probe(spec, w, fns, po);
                log << "  operator norm probe " << describe(w) << ": " << format_real(bound) << "\n";
                probes.push_back({{"w", to_json(w)}, {"bound", bound}});
            }
        }
        report["operator_norm_probe"] = probes;
        report["pass"] = st.pass;
        write_file(config.output_dir / "selftest.json", report.dump(2) + "\n");

        std::error_code ec;
        fs::remove(config.output_dir / kStampFile, ec);
        if (!st.pass) return static_cast<int>(kCheckFailed);
        write_file(config.output_dir / kStampFile, spec.fingerprint + "\n");
        return static_cast<int>(kOk);
    });
}

int cmd_curves(const RunConfig& config, bool force, std::ostream& log) {
    return guarded(log, [&] {
        const KernelSpec spec = resolve_kernel(config);
        require_stamp(config, spec, force);
        prepare_output(config.output_dir);
        const std::vector<FunctionHandle> fns = resolve_functions(config);
        const std::vector<int> ns = n_values(config);
        const std::vector<double> deltas = delta_values(config);
        const StudyOptions opts = study_options(config);
        bool any_failure = false;

        for (const auto& w : config.weights) {
            const std::string tag = weight_tag(w);
            log << "curves: " << describe(w) << "\n";
            auto curves = ordered_map<CurveFiles>(fns.size(), config.threads, [&](std::size_t i) {
                CurveFiles c;
                c.label = fns[i].label;
                c.errors = error_sequence(fns[i], ns, w, spec.sigma, opts.approx);
                try {
                    c.modulus = modulus_curve(spec, fns[i], w, deltas, opts.modulus);
                } catch (const std::exception& e) {
                    c.failure = e.what();
                    c.modulus.f_label = fns[i].label;
                    c.modulus.w = w;
                    c.modulus.deltas = deltas;
                    c.modulus.omegas.assign(deltas.size(), std::nan(""));
                }
                std::ostringstream e_csv;
                write_csv(e_csv, c.errors, spec.fingerprint);
                c.errors_csv = e_csv.str();
                std::ostringstream m_csv;
                write_csv(m_csv, c.modulus, spec.fingerprint);
                if (!c.failure.empty()) m_csv << "# failed: " << c.failure << "\n";
                c.modulus_csv = m_csv.str();
                return c;
            });
            for (const auto& c : curves) {
                write_file(config.output_dir / ("E_" + c.label + "_" + tag + ".csv"), c.errors_csv);
                write_file(config.output_dir / ("omega_" + c.label + "_" + tag + ".csv"),
                           c.modulus_csv);
                const bool row_failed =
                    !c.failure.empty() ||
                    std::any_of(c.errors.failures.begin(), c.errors.failures.end(),
                                [](const std::string& s) { return !s.empty(); });
                if (row_failed) {
                    any_failure = true;
                    log << "  " << c.label << ": some rows failed (see CSV comments)\n";
                }
            }
            write_file(config.output_dir / ("E_" + tag + ".dat"),
                       gnuplot_data(curves, false, spec.fingerprint));
            write_file(config.output_dir / ("omega_" + tag + ".dat"),
                       gnuplot_data(curves, true, spec.fingerprint));
            write_file(config.output_dir / (tag + ".gp"), gnuplot_script(tag, curves.size()));
        }
        return static_cast<int>(any_failure ? kCheckFailed : kOk);
    });
}

int cmd_verify(const RunConfig& config, bool force, std::ostream& log) {
    return guarded(log, [&] {
        const KernelSpec spec = resolve_kernel(config);
        require_stamp(config, spec, force);
        prepare_output(config.output_dir);
        const std::vector<FunctionHandle> fns = resolve_functions(config);
        std::vector<int> ns = n_values(config);
        ns.erase(ns.begin());  // n >= 2
        const StudyOptions opts = study_options(config);

        bool ok = true;
        Json report = {{"kernel", spec.fingerprint}, {"kernel_spec", config.kernel_spec_path}};
        const MultiplierReport mult = multiplier_check(spec, multiplier_members());
        log << "verify: multiplier identity max rel err " << format_real(mult.max_rel_err)
            << (mult.pass ? "  pass\n" : "  FAIL\n");
        report["multiplier"] = to_json(mult);
        ok = ok && mult.pass;

        Json runs = Json::array();
        std::ostringstream summary;
        bool first = true;
        for (const auto& w : config.weights) {
            log << "verify: " << describe(w) << "\n";
            const std::vector<FunctionVerdict> verdicts =
                verify_all(spec, w, fns, ns, opts, config.threads);
            Json per = Json::array();
            for (const auto& v : verdicts) {
                const bool pass = all_pass(v);
                ok = ok && pass;
                per.push_back(to_json(v));
                log << "  " << v.study.f_label << (pass ? "  pass\n" : "  FAIL\n");
            }
            runs.push_back({{"w", to_json(w)},
                            {"admissible",
                             {{"jackson", admissible_for(w, Theorem::jackson)},
                              {"inverse", admissible_for(w, Theorem::inverse)},
                              {"direct", admissible_for(w, Theorem::direct)},
                              {"coincidence", admissible_for(w, Theorem::coincidence)}}},
                            {"functions", per}});
            std::ostringstream csv;
            write_summary_csv(csv, verdicts, spec.fingerprint);
            std::string text = csv.str();
            if (!first) text = text.substr(text.find('\n', text.find('\n') + 1) + 1);
            summary << text;
            first = false;
        }
        report["runs"] = runs;
        report["pass"] = ok;
        write_file(config.output_dir / "verify.json", report.dump(2) + "\n");
        write_file(config.output_dir / "verify_summary.csv", summary.str());
        return static_cast<int>(ok ? kOk : kCheckFailed);
    });
}

}  // namespace wmod::cli
