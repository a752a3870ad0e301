#include "doctest.h"
#include "wmod/cli.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace wmod;
using namespace wmod::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("wmod-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const std::string kKernel = R"([sigma]
form = one_minus_u2
exponent = 1
[cosfactor]
form = squared_half_one_plus_cos
[family_x]
a = 2
b = 2
[family_y]
a = 0
b = 4
)";

RunConfig small_config(const fs::path& dir, const std::string& functions = "abs_x_pow_1 const_2") {
    return parse_run_config("[run]\nweights = inf:1\nfunctions = " + functions +
                                "\nn_max = 8\noutput_dir = out\nthreads = 1\n",
                            dir);
}

int count_data_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#' && line.find(',') != std::string::npos &&
            std::isdigit(static_cast<unsigned char>(line[0]))) {
            ++rows;
        }
    }
    return rows;
}

}  // namespace

TEST_CASE("config parsing: defaults and values") {
    const RunConfig c = parse_run_config("", "/base");
    CHECK(c.kernel_spec_path == "builtin");
    REQUIRE(c.weights.size() == 1);
    CHECK(c.weights[0].is_uniform());
    CHECK(c.functions.size() == corpus().size());
    CHECK(c.n_max == 64);
    CHECK(c.output_dir == fs::path("/base/wmod-out"));

    const RunConfig d = parse_run_config(
        "[kernel]\nspec = k.ini\n[run]\nweights = inf:1 2:1, 1:0.75\nfunctions = exp_x const_-1.5\n"
        "n_max = 10\ndelta_grid = geometric 0.01 1 5\n[resolution]\nscale = 2\nshift_nodes = 64\n",
        "/base");
    CHECK(d.kernel_spec_path == "/base/k.ini");
    CHECK(d.weights.size() == 3);
    CHECK(d.weights[2].alpha == 0.75);
    CHECK(d.resolution == 2);
    CHECK(d.overrides.at("shift_nodes") == 64.0);
    CHECK(study_options(d).modulus.shift_nodes == 128);
    const std::vector<double> deltas = delta_values(d);
    REQUIRE(deltas.size() == 5);
    CHECK(deltas.front() == doctest::Approx(0.01));
    CHECK(deltas.back() == 1.0);
    CHECK(resolve_functions(d)[1](0.3) == -1.5);
    CHECK(n_values(d).size() == 10);
    CHECK(weight_tag(d.weights[0]) == "p-inf_alpha-1");
    CHECK(weight_tag(d.weights[2]) == "p-1_alpha-0.75");

    RunConfig r = c;
    r.n_max = 4;
    CHECK(delta_values(r) == std::vector<double>{0.25, 1.0 / 3.0, 0.5});
}

TEST_CASE("config parsing rejects bad input") {
    const fs::path base = "/base";
    const char* bad[] = {
        "[run]\nweights = inf\n",
        "[run]\nweights = 0.5:1\n",
        "[run]\nweights =\n",
        "[run]\nfunctions = nope\n",
        "[run]\nn_max = 3\n",
        "[run]\nn_max = 1000\n",
        "[run]\nn_max = six\n",
        "[run]\ndelta_grid = 0.5 0.2\n",
        "[run]\ndelta_grid = 0.1 4\n",
        "[run]\ndelta_grid = geometric 1 0.1 5\n",
        "[run]\nthreads = -1\n",
        "[run]\nunknown = 1\n",
        "[other]\nx = 1\n",
        "[resolution]\nscale = 0\n",
        "[resolution]\nshift_nodes = 2.5\n",
        "this is [not ini",
    };
    for (const char* text : bad) {
        CAPTURE(text);
        CHECK_THROWS_AS((void)parse_run_config(text, base), ConfigError);
    }
    CHECK_THROWS_AS((void)load_run_config("/nonexistent/run.ini"), ConfigError);
}

TEST_CASE("selftest: missing kernel file is a usage error") {
    TempDir tmp;
    write(tmp.path / "run.ini", "[kernel]\nspec = missing.ini\n[run]\nfunctions = exp_x\noutput_dir = out\n");
    const RunConfig c = load_run_config(tmp.path / "run.ini");
    std::ostringstream log;
    CHECK(cmd_selftest(c, log) == kUsageError);
    CHECK(log.str().find("error") != std::string::npos);
}

TEST_CASE("selftest: a corrupted kernel fails and leaves no stamp") {
    TempDir tmp;
    std::string corrupted = kKernel;
    corrupted.replace(corrupted.find("exponent = 1"), 12, "exponent = 2");
    write(tmp.path / "bad.ini", corrupted);
    write(tmp.path / "run.ini", "[kernel]\nspec = bad.ini\n[run]\nfunctions = exp_x\noutput_dir = out\n");
    const RunConfig c = load_run_config(tmp.path / "run.ini");
    std::ostringstream log;
    CHECK(cmd_selftest(c, log) == kCheckFailed);
    CHECK_FALSE(fs::exists(c.output_dir / kStampFile));
    const std::string json = read(c.output_dir / "selftest.json");
    CHECK(json.find("\"pass\": false") != std::string::npos);
    CHECK(json.find("max_err_unit") != std::string::npos);
    CHECK(cmd_curves(c, false, log) == kUsageError);
}

TEST_CASE("curves require a stamp unless forced") {
    TempDir tmp;
    const RunConfig c = small_config(tmp.path);
    std::ostringstream log;
    CHECK(cmd_curves(c, false, log) == kUsageError);
    CHECK(cmd_verify(c, false, log) == kUsageError);
    CHECK(cmd_curves(c, true, log) == kOk);
}

TEST_CASE("selftest then curves: files, rows and zero curves for constants") {
    TempDir tmp;
    const RunConfig c = small_config(tmp.path);
    std::ostringstream log;
    REQUIRE(cmd_selftest(c, log) == kOk);
    CHECK(fs::exists(c.output_dir / kStampFile));
    CHECK(read(c.output_dir / "selftest.json").find("operator_norm_probe") != std::string::npos);
    REQUIRE(cmd_curves(c, false, log) == kOk);

    const std::string tag = "p-inf_alpha-1";
    const std::string e = read(c.output_dir / ("E_abs_x_pow_1_" + tag + ".csv"));
    const std::string om = read(c.output_dir / ("omega_abs_x_pow_1_" + tag + ".csv"));
    CHECK(count_data_rows(e) == 8);
    CHECK(count_data_rows(om) == 7);
    CHECK(e.find("n,E_n") != std::string::npos);
    CHECK(om.find("delta,omega") != std::string::npos);

    std::istringstream zero(read(c.output_dir / ("E_const_2_" + tag + ".csv")));
    std::string line;
    int rows = 0;
    while (std::getline(zero, line)) {
        if (line.empty() || line[0] == '#' || line == "n,E_n") continue;
        CHECK(line.substr(line.find(',') + 1) == "0");
        ++rows;
    }
    CHECK(rows == 8);
    CHECK(fs::exists(c.output_dir / ("E_" + tag + ".dat")));
    CHECK(fs::exists(c.output_dir / (tag + ".gp")));
}

TEST_CASE("curves are byte-identical across runs") {
    TempDir a;
    TempDir b;
    std::ostringstream log;
    const RunConfig ca = small_config(a.path, "abs_x_minus_half_pow_1.5 trunc_pow_0.5");
    const RunConfig cb = small_config(b.path, "abs_x_minus_half_pow_1.5 trunc_pow_0.5");
    REQUIRE(cmd_curves(ca, true, log) == kOk);
    REQUIRE(cmd_curves(cb, true, log) == kOk);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(ca.output_dir)) {
        const fs::path other = cb.output_dir / entry.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(read(entry.path()) == read(other));
        ++files;
    }
    CHECK(files == 7);
}

TEST_CASE("verify: inadmissible weights run no checks and exit 0") {
    TempDir tmp;
    const RunConfig c =
        parse_run_config("[run]\nweights = 2:0\nfunctions = exp_x\nn_max = 8\noutput_dir = out\n", tmp.path);
    std::ostringstream log;
    CHECK(cmd_verify(c, true, log) == kOk);
    const std::string json = read(c.output_dir / "verify.json");
    CHECK(json.find("\"jackson\": false") != std::string::npos);
    CHECK(fs::exists(c.output_dir / "verify_summary.csv"));
}

TEST_CASE("verify: a wrong family index fails even when forced") {
    TempDir tmp;
    std::string wrong = kKernel;
    wrong.replace(wrong.find("b = 4"), 5, "b = 5");
    write(tmp.path / "wrong.ini", wrong);
    write(tmp.path / "run.ini",
          "[kernel]\nspec = wrong.ini\n[run]\nweights = 2:0\nfunctions = exp_x\nn_max = 8\noutput_dir = out\n");
    const RunConfig c = load_run_config(tmp.path / "run.ini");
    std::ostringstream log;
    CHECK(cmd_selftest(c, log) == kCheckFailed);
    CHECK(cmd_verify(c, true, log) == kCheckFailed);
    CHECK(read(c.output_dir / "verify.json").find("\"pass\": false") != std::string::npos);
}
