#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "helpers.hpp"

#ifndef BRP_CLI_PATH
#error "BRP_CLI_PATH must point at the command-line binary"
#endif

namespace fs = std::filesystem;

using brp::DenseMatrix;
using brp::Index;

namespace {

struct TempDir {
    fs::path root;

    TempDir() {
        static int counter = 0;
        root = fs::temp_directory_path() /
               ("brp_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(root);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(root, ec);
    }
    std::string file(const std::string& name) const {
        return (root / name).string();
    }
};

struct CliResult {
    int code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const std::string log =
        (fs::temp_directory_path() /
         ("brp_cli_log_" + std::to_string(::getpid()) + "_" +
          std::to_string(counter++)))
            .string();
    std::string cmd = env.empty() ? "" : env + " ";
    cmd += std::string("\"") + BRP_CLI_PATH + "\" " + args + " > " + log +
           " 2>&1";
    const int raw = std::system(cmd.c_str());
    CliResult res;
    if (raw != -1 && WIFEXITED(raw)) res.code = WEXITSTATUS(raw);
    std::ifstream in(log);
    res.output.assign(std::istreambuf_iterator<char>(in),
                      std::istreambuf_iterator<char>());
    std::error_code ec;
    fs::remove(log, ec);
    return res;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

struct Csv {
    std::vector<std::vector<std::string>> rows;  // header excluded

    explicit Csv(const std::string& path) {
        std::ifstream in(path);
        REQUIRE(in.good());
        std::string line;
        REQUIRE(std::getline(in, line));
        REQUIRE(line == brp::records_csv_header());
        while (std::getline(in, line))
            if (!line.empty()) rows.push_back(split(line, ','));
    }

    // Value of the first row whose experiment column matches.
    double value_of(const std::string& experiment) const {
        for (const auto& r : rows)
            if (r.at(0) == experiment) return std::stod(r.at(8));
        FAIL("no row for experiment " + experiment);
        return 0.0;
    }
    bool has(const std::string& experiment) const {
        for (const auto& r : rows)
            if (r.at(0) == experiment) return true;
        return false;
    }
};

// The whole file with the trailing (timing) column removed from every line.
std::string without_walls(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string out, line;
    while (std::getline(in, line)) {
        const auto cut = line.rfind(',');
        out += (cut == std::string::npos) ? line : line.substr(0, cut);
        out += '\n';
    }
    return out;
}

}  // namespace

TEST_CASE("the selftest passes") {
    const CliResult res = run_cli("selftest");
    REQUIRE(res.code == 0);
    REQUIRE(res.output.find("selftest: ok") != std::string::npos);
}

TEST_CASE("the version flag prints and exits cleanly") {
    const CliResult res = run_cli("--version");
    REQUIRE(res.code == 0);
    REQUIRE_FALSE(res.output.empty());
}

TEST_CASE("recover meets the exactness gate") {
    TempDir dir;
    const std::string out = dir.file("recover.csv");
    const CliResult res =
        run_cli("recover --n 120 --rank 8 --trials 3 --seed 5 --out " + out);
    REQUIRE(res.code == 0);
    const Csv csv(out);
    REQUIRE(csv.rows.size() == 3);
    for (const auto& r : csv.rows) {
        REQUIRE(r.at(0) == "recover");
        REQUIRE(r.at(1) == "120");
        REQUIRE(r.at(3) == "8");
        REQUIRE(r.at(7) == "rel_fro_error");
        REQUIRE(std::stod(r.at(8)) <= 1e-10);
        REQUIRE(std::stod(r.at(9)) >= 0.0);
    }
}

TEST_CASE("usage and configuration errors exit with code two") {
    REQUIRE(run_cli("").code == 2);
    REQUIRE(run_cli("frobnicate").code == 2);
    REQUIRE(run_cli("recover --bogus 1").code == 2);
    TempDir dir;
    REQUIRE(run_cli("bounds --spectrum geometric:0.8:30 --u 0.5 --out " +
                    dir.file("x.csv"))
                .code == 2);
    REQUIRE(run_cli("bounds --spectrum geometric:2:30 --out " +
                    dir.file("y.csv"))
                .code == 2);
    REQUIRE(run_cli("bounds --spectrum warp:0.5:30 --out " + dir.file("z.csv"))
                .code == 2);
}

TEST_CASE("missing inputs and unwritable outputs exit with code three") {
    TempDir dir;
    REQUIRE(run_cli("bounds --spectrum-file " + dir.file("absent.csv") +
                    " --out " + dir.file("b.csv"))
                .code == 3);
    REQUIRE(run_cli("recover --n 40 --rank 4 --out " +
                    dir.file("no_dir/r.csv"))
                .code == 3);
}

TEST_CASE("a bounds run emits calibrated rows") {
    TempDir dir;
    const std::string out = dir.file("bounds.csv");
    const CliResult res = run_cli(
        "bounds --spectrum geometric:0.8:60 --rank 5 --oversample 5 --q 0 "
        "--u 2 --t 2 --trials 500 --out " +
        out);
    REQUIRE(res.code == 0);
    const Csv csv(out);
    REQUIRE(csv.value_of("bounds_det_violation_rate") == 0.0);
    const double mean = csv.value_of("bounds_observed_mean");
    const double avg = csv.value_of("bounds_avg");
    REQUIRE(mean <= avg);
    const double fail = csv.value_of("bounds_fail_prob");
    REQUIRE(std::abs(fail - 0.2759602832366127) < 1e-12);
    REQUIRE(csv.value_of("bounds_dev_exceedance_rate") <= fail + 0.05);
    REQUIRE(csv.value_of("bounds_observed_max") <= csv.value_of("bounds_dev"));
}

TEST_CASE("bounds whose hypotheses fail are reported as skipped") {
    TempDir dir;
    const std::string thin = dir.file("thin.csv");
    REQUIRE(run_cli("bounds --spectrum geometric:0.8:30 --rank 3 "
                    "--oversample 3 --trials 5 --out " +
                    thin)
                .code == 0);
    const Csv a(thin);
    REQUIRE(a.has("bounds_avg"));
    REQUIRE(a.has("bounds_dev_skipped"));
    REQUIRE_FALSE(a.has("bounds_dev"));

    const std::string thinner = dir.file("thinner.csv");
    REQUIRE(run_cli("bounds --spectrum geometric:0.8:30 --rank 3 "
                    "--oversample 1 --trials 5 --out " +
                    thinner)
                .code == 0);
    const Csv b(thinner);
    REQUIRE(b.has("bounds_avg_skipped"));
    REQUIRE(b.has("bounds_dev_skipped"));
    REQUIRE(b.has("bounds_det"));
}

TEST_CASE("the error curve matches the optimal baseline") {
    TempDir dir;
    const std::string out = dir.file("curve.csv");
    const CliResult res = run_cli(
        "error-curve --n 80 --ranks 10,80 --q-list 0,1 --seed 3 --out " + out);
    REQUIRE(res.code == 0);

    // Rebuild the baseline with the library: the run is seeded the same way.
    const DenseMatrix x = brp::gaussian_matrix(80, 80, brp::derive({3}, 0));
    const brp::SvdFactors f = brp::oriented_svd(x);
    double tail2 = 0.0;
    for (Index i = 10; i < f.sigma.size(); ++i)
        tail2 += f.sigma(i) * f.sigma(i);
    const double base10 = std::sqrt(tail2) / brp::frobenius_norm(x);

    const Csv csv(out);
    REQUIRE(csv.rows.size() == 2 * 2 + 2 * 2 * 2);
    bool saw_base10 = false;
    for (const auto& r : csv.rows) {
        const double value = std::stod(r.at(8));
        if (r.at(0) == "error_curve_svd" && r.at(3) == "10" &&
            r.at(7) == "rel_fro_error") {
            REQUIRE(std::abs(value - base10) <= 1e-13);
            saw_base10 = true;
        }
        if (r.at(3) == "80") REQUIRE(value <= 1e-10);  // full-width recovery
        if (r.at(0) == "error_curve" && r.at(3) == "10" &&
            r.at(7) == "rel_fro_error") {
            REQUIRE(value >= base10 - 1e-12);  // nothing beats the baseline
            REQUIRE(value <= 1.0);
        }
    }
    REQUIRE(saw_base10);
}

TEST_CASE("runs are reproducible byte for byte modulo timing") {
    TempDir dir;
    const std::string args =
        "bounds --spectrum geometric:0.9:30 --rank 3 --oversample 2 "
        "--trials 50 --out ";
    REQUIRE(run_cli(args + dir.file("b1.csv")).code == 0);
    REQUIRE(run_cli(args + dir.file("b2.csv")).code == 0);
    REQUIRE(run_cli(args + dir.file("b3.csv"), "BRP_THREADS=3").code == 0);
    const std::string one = without_walls(dir.file("b1.csv"));
    REQUIRE(one == without_walls(dir.file("b2.csv")));
    REQUIRE(one == without_walls(dir.file("b3.csv")));

    const std::string rec = "recover --n 60 --rank 4 --trials 2 --out ";
    REQUIRE(run_cli(rec + dir.file("r1.csv")).code == 0);
    REQUIRE(run_cli(rec + dir.file("r2.csv")).code == 0);
    REQUIRE(without_walls(dir.file("r1.csv")) ==
            without_walls(dir.file("r2.csv")));
}

TEST_CASE("the thread budget must be a positive count") {
    TempDir dir;
    const CliResult res =
        run_cli("bounds --spectrum geometric:0.8:20 --rank 2 --oversample 2 "
                "--trials 3 --out " +
                    dir.file("t.csv"),
                "BRP_THREADS=abc");
    REQUIRE(res.code == 2);
}

TEST_CASE("compress rebuilds an image corpus both ways") {
    TempDir dir;
    const DenseMatrix base = brp::matmul(brp::gaussian_matrix(12, 3, {70}),
                                         brp::gaussian_matrix(3, 256, {71}));
    const double peak = base.cwiseAbs().maxCoeff();
    brp::ImageStack stack;
    stack.count = 12;
    stack.height = 16;
    stack.width = 16;
    stack.as_matrix = (0.5 * (base / peak).array() + 0.5).matrix();
    const std::string corpus = (dir.root / "corpus").string();
    brp::write_pgm_stack(stack, corpus);

    const std::string report = dir.file("report.csv");
    const std::string out_dir = (dir.root / "out").string();
    const CliResult res = run_cli("compress --input-dir " + corpus +
                                  " --rank 3 --oversample 2 --q 1 --seed 9 "
                                  "--out-dir " +
                                  out_dir + " --report " + report);
    REQUIRE(res.code == 0);
    const Csv csv(report);
    REQUIRE(csv.rows.size() == 4);
    REQUIRE(csv.has("compress_svd"));
    REQUIRE(csv.has("compress_brp"));
    for (const auto& r : csv.rows) {
        const double v = std::stod(r.at(8));
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
    std::vector<std::string> svd_paths, brp_paths;
    for (Index i = 0; i < 12; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%04d.pgm", static_cast<int>(i));
        svd_paths.push_back(out_dir + "/svd/" + name);
        brp_paths.push_back(out_dir + "/brp/" + name);
        REQUIRE(fs::exists(svd_paths.back()));
        REQUIRE(fs::exists(brp_paths.back()));
    }
    REQUIRE(brp::read_pgm_stack(svd_paths).width == 16);
    REQUIRE(brp::read_pgm_stack(brp_paths).height == 16);

    REQUIRE(run_cli("compress --input-dir " + (dir.root / "empty").string() +
                    " --rank 2 --out-dir " + out_dir + " --report " + report)
                .code == 2);
}
