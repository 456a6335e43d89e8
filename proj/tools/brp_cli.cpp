// Command-line runner: every pipeline as a subcommand, results as CSV.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "brp/brp.hpp"

namespace {

using brp::DenseMatrix;
using brp::Index;
using brp::RandomSeed;
using brp::Vector;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

int thread_budget() {
    const char* s = std::getenv("BRP_THREADS");
    if (!s || !*s) return 0;
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (*end != '\0' || v < 0)
        throw brp::config_error("BRP_THREADS must be a nonnegative integer");
    return static_cast<int>(v);
}

int run_recover(Index n, Index rank, std::uint64_t seed, Index trials,
                const std::string& out) {
    if (rank < 1 || rank > n)
        throw brp::config_error("recover: need 1 <= rank <= n");
    std::vector<brp::ExperimentRecord> records;
    bool all_ok = true;
    for (Index t = 0; t < trials; ++t) {
        const RandomSeed trial_seed =
            brp::derive(RandomSeed{seed}, static_cast<std::uint64_t>(t));
        const DenseMatrix a = brp::gaussian_matrix(n, rank, brp::derive(trial_seed, 1));
        const DenseMatrix b = brp::gaussian_matrix(rank, n, brp::derive(trial_seed, 2));
        const brp::ProductOperator op(a, b);
        brp::SketchConfig cfg;
        cfg.rank = rank;
        cfg.scheme = brp::Scheme::correlated;
        cfg.seed = brp::derive(trial_seed, 0);
        const auto t0 = std::chrono::steady_clock::now();
        const brp::LowRankFactors f = brp::rowspace_recover(op, cfg);
        const double wall = seconds_since(t0);
        const double err =
            brp::projected_product_error(a, b, brp::transpose(f.right));
        const bool ok = err <= 1e-10;
        all_ok = all_ok && ok;
        std::cout << "trial " << t << ": n=" << n << " rank=" << rank
                  << " rel_fro_error=" << err << " wall=" << wall << "s"
                  << (ok ? "" : "  ** exceeds 1e-10") << "\n";
        records.push_back({"recover", n, n, rank, 0, 0, trial_seed.value,
                           "rel_fro_error", err, wall});
    }
    brp::write_records_csv(records, out);
    std::cout << (all_ok ? "recover: ok" : "recover: FAILED") << "\n";
    return all_ok ? 0 : 1;
}

int run_error_curve(Index n, std::vector<Index> ranks, std::vector<Index> qs,
                    std::uint64_t seed, const std::string& out) {
    if (n < 1) throw brp::config_error("error-curve: n must be >= 1");
    if (ranks.empty() || qs.empty())
        throw brp::config_error("error-curve: --ranks and --q-list must be nonempty");
    for (Index r : ranks)
        if (r < 1 || r > n)
            throw brp::config_error("error-curve: rank " + std::to_string(r) +
                                    " outside [1, " + std::to_string(n) + "]");
    for (Index q : qs)
        if (q < 0) throw brp::config_error("error-curve: q must be >= 0");

    const RandomSeed base{seed};
    const DenseMatrix x = brp::gaussian_matrix(n, n, brp::derive(base, 0));
    const auto t0 = std::chrono::steady_clock::now();
    const brp::SvdFactors f = brp::oriented_svd(x);
    const double wall_svd = seconds_since(t0);
    const double fro_x = brp::frobenius_norm(x);
    const double spec_x = f.sigma(0);

    std::vector<brp::ExperimentRecord> records;
    std::uint64_t stream = 1;
    for (Index r : ranks) {
        double tail2 = 0.0;
        for (Index i = r; i < f.sigma.size(); ++i) tail2 += f.sigma(i) * f.sigma(i);
        const double base_fro = std::sqrt(tail2) / fro_x;
        const double base_spec =
            ((r < f.sigma.size()) ? f.sigma(r) : 0.0) / spec_x;
        records.push_back({"error_curve_svd", n, n, r, 0, 0, seed,
                           "rel_fro_error", base_fro, wall_svd});
        records.push_back({"error_curve_svd", n, n, r, 0, 0, seed,
                           "rel_spec_error", base_spec, wall_svd});
        for (Index q : qs) {
            brp::SketchConfig cfg;
            cfg.rank = r;
            cfg.power_q = q;
            cfg.scheme = brp::Scheme::correlated;
            cfg.seed = brp::derive(base, stream++);
            brp::ApproxOptions opts;
            opts.pinv_fallback = true;  // deep power iterations may exhaust
                                        // the exact-inverse condition budget
            const auto t1 = std::chrono::steady_clock::now();
            // At q = 0 the correlated closed form collapses to the projection
            // X Q2 Q2'; evaluating it that way keeps full-width points at
            // machine precision instead of eps times the middle condition.
            const brp::LowRankFactors lr =
                (q == 0) ? brp::rowspace_recover(x, cfg)
                         : brp::power_approximate(x, cfg, opts);
            const double wall = seconds_since(t1);
            const double fro =
                brp::approximation_error(x, lr, brp::ErrorNorm::frobenius, true);
            const double spec =
                brp::approximation_error(x, lr, brp::ErrorNorm::spectral, true);
            records.push_back({"error_curve", n, n, r, 0, q, cfg.seed.value,
                               "rel_fro_error", fro, wall});
            records.push_back({"error_curve", n, n, r, 0, q, cfg.seed.value,
                               "rel_spec_error", spec, wall});
            std::cout << "rank " << r << " q " << q << ": rel_fro=" << fro
                      << " rel_spec=" << spec << " (svd baseline " << base_fro
                      << " / " << base_spec << ")\n";
        }
    }
    brp::write_records_csv(records, out);
    return 0;
}

Vector spectrum_from_flag(const std::string& flag) {
    const auto first = flag.find(':');
    const auto second = flag.find(':', first == std::string::npos ? first : first + 1);
    if (first == std::string::npos || second == std::string::npos)
        throw brp::config_error(
            "--spectrum must look like geometric:rho:n or power:alpha:n");
    const std::string kind = flag.substr(0, first);
    const std::string param = flag.substr(first + 1, second - first - 1);
    const std::string count = flag.substr(second + 1);
    double value = 0.0;
    Index n = 0;
    try {
        value = std::stod(param);
        n = static_cast<Index>(std::stoll(count));
    } catch (const std::exception&) {
        throw brp::config_error("--spectrum: cannot parse '" + flag + "'");
    }
    if (n < 1) throw brp::config_error("--spectrum: length must be >= 1");
    Vector s(n);
    if (kind == "geometric") {
        if (!(value > 0.0 && value <= 1.0))
            throw brp::config_error("--spectrum geometric: rho must be in (0, 1]");
        double cur = 1.0;
        for (Index i = 0; i < n; ++i, cur *= value) s(i) = cur;
    } else if (kind == "power") {
        if (!(value >= 0.0))
            throw brp::config_error("--spectrum power: alpha must be >= 0");
        for (Index i = 0; i < n; ++i)
            s(i) = std::pow(static_cast<double>(i + 1), -value);
    } else {
        throw brp::config_error("--spectrum: unknown family '" + kind + "'");
    }
    return s;
}

Vector spectrum_from_file(const std::string& path) {
    const DenseMatrix m = brp::read_matrix(path, brp::MatrixFormat::csv);
    if (m.rows() != 1 && m.cols() != 1)
        throw brp::parse_error(path + ": spectrum file must be a single row or column");
    Vector s(m.size());
    Index k = 0;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) s(k++) = m(i, j);
    return s;
}

int run_bounds(const Vector& spectrum, Index rank, Index oversample, Index q,
               double u, double t, Index trials, const std::string& out) {
    if (!(u >= 1.0) || !(t >= 1.0))
        throw brp::config_error("bounds: u and t must be >= 1");
    const Index n = spectrum.size();
    const RandomSeed base{42};  // no seed flag: runs are reproducible by design
    const DenseMatrix x =
        brp::synthesize_with_spectrum(spectrum, n, n, brp::derive(base, 1));
    brp::SketchConfig cfg;
    cfg.rank = rank;
    cfg.oversample = oversample;
    cfg.power_q = q;
    cfg.scheme = brp::Scheme::correlated;
    cfg.seed = brp::derive(base, 2);
    const auto t0 = std::chrono::steady_clock::now();
    const brp::BoundReport rep =
        brp::monte_carlo_check(x, cfg, trials, u, t, {}, thread_budget());
    const double wall = seconds_since(t0);

    const double lam1 = spectrum(0);
    const double scale = (lam1 > 0.0) ? lam1 : 1.0;
    const double trials_d = static_cast<double>(trials);
    std::vector<brp::ExperimentRecord> records;
    auto push = [&](const std::string& exp, const std::string& metric, double value,
                    double row_wall) {
        records.push_back({exp, n, n, rank, oversample, q, base.value, metric,
                           value, row_wall});
    };
    push("bounds_observed_mean", "rel_spec_error", rep.observed_mean / scale, wall);
    push("bounds_observed_max", "rel_spec_error", rep.observed_max / scale, 0.0);
    if (rep.deterministic) {
        push("bounds_det", "bound_det", *rep.deterministic, 0.0);
        push("bounds_det_violation_rate", "fail_prob",
             static_cast<double>(rep.deterministic_violations) / trials_d, 0.0);
    } else {
        push("bounds_det_skipped", "bound_det", 0.0, 0.0);
    }
    if (rep.average) {
        push("bounds_avg", "bound_avg", *rep.average, 0.0);
    } else {
        push("bounds_avg_skipped", "bound_avg", 0.0, 0.0);
    }
    if (rep.deviation_value) {
        push("bounds_dev", "bound_dev", *rep.deviation_value, 0.0);
        push("bounds_fail_prob", "fail_prob", *rep.deviation_fail_prob, 0.0);
        push("bounds_dev_exceedance_rate", "fail_prob",
             static_cast<double>(rep.deviation_exceedances) / trials_d, 0.0);
    } else {
        push("bounds_dev_skipped", "bound_dev", 0.0, 0.0);
    }
    brp::write_records_csv(records, out);

    std::cout << "observed spectral error: mean " << rep.observed_mean << ", max "
              << rep.observed_max << " over " << trials << " trials\n";
    if (rep.deterministic)
        std::cout << "per-draw bound: min " << *rep.deterministic << ", violations "
                  << rep.deterministic_violations << "/" << trials << "\n";
    if (rep.average) std::cout << "average bound: " << *rep.average << "\n";
    else std::cout << "average bound skipped (needs oversample >= 2)\n";
    if (rep.deviation_value)
        std::cout << "deviation bound: " << *rep.deviation_value << " (fail prob "
                  << *rep.deviation_fail_prob << "), exceedances "
                  << rep.deviation_exceedances << "/" << trials << "\n";
    else std::cout << "deviation bound skipped (needs oversample >= 4)\n";
    return 0;
}

int run_compress(const std::string& input_dir, Index rank, Index q, Index oversample,
                 std::uint64_t seed, const std::string& out_dir,
                 const std::string& report) {
    namespace fs = std::filesystem;
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(input_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    if (paths.empty())
        throw brp::io_error("compress: no .pgm files in " + input_dir);
    const brp::ImageStack stack = brp::read_pgm_stack(paths);
    const DenseMatrix& x = stack.as_matrix;
    if (rank < 1 || rank > std::min(x.rows(), x.cols()))
        throw brp::config_error("compress: rank outside [1, " +
                                std::to_string(std::min(x.rows(), x.cols())) + "]");

    auto t0 = std::chrono::steady_clock::now();
    const auto [svd_lr, factors] = brp::truncated_svd(x, rank);
    const double wall_svd = seconds_since(t0);
    const double svd_fro =
        brp::approximation_error(x, svd_lr, brp::ErrorNorm::frobenius, true);
    const double svd_spec =
        brp::approximation_error(x, svd_lr, brp::ErrorNorm::spectral, true);

    brp::SketchConfig cfg;
    cfg.rank = rank;
    cfg.oversample = oversample;
    cfg.power_q = q;
    cfg.scheme = brp::Scheme::correlated;
    cfg.seed = brp::derive(RandomSeed{seed}, 0);
    brp::ApproxOptions opts;
    opts.pinv_fallback = true;
    t0 = std::chrono::steady_clock::now();
    const brp::LowRankFactors lr = (q == 0)
                                       ? brp::rowspace_recover(x, cfg)
                                       : brp::power_approximate(x, cfg, opts);
    const double wall_brp = seconds_since(t0);
    const double brp_fro =
        brp::approximation_error(x, lr, brp::ErrorNorm::frobenius, true);
    const double brp_spec =
        brp::approximation_error(x, lr, brp::ErrorNorm::spectral, true);

    brp::ImageStack svd_stack = stack;
    svd_stack.as_matrix = brp::materialize(svd_lr);
    brp::write_pgm_stack(svd_stack, out_dir + "/svd");
    brp::ImageStack brp_stack = stack;
    brp_stack.as_matrix = brp::materialize(lr);
    brp::write_pgm_stack(brp_stack, out_dir + "/brp");

    std::vector<brp::ExperimentRecord> records;
    const Index rows = x.rows(), cols = x.cols();
    records.push_back({"compress_svd", rows, cols, rank, 0, 0, seed,
                       "rel_fro_error", svd_fro, wall_svd});
    records.push_back({"compress_svd", rows, cols, rank, 0, 0, seed,
                       "rel_spec_error", svd_spec, wall_svd});
    records.push_back({"compress_brp", rows, cols, rank, oversample, q, seed,
                       "rel_fro_error", brp_fro, wall_brp});
    records.push_back({"compress_brp", rows, cols, rank, oversample, q, seed,
                       "rel_spec_error", brp_spec, wall_brp});
    brp::write_records_csv(records, report);

    std::cout << "svd: rel_fro=" << svd_fro << " wall=" << wall_svd << "s\n";
    std::cout << "brp: rel_fro=" << brp_fro << " wall=" << wall_brp << "s\n";
    std::cout << "quality ratio " << brp_fro / svd_fro << ", time ratio "
              << wall_brp / wall_svd << "\n";
    return 0;
}

int run_selftest() {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok,
                     const std::string& detail = "") {
        if (ok) {
            std::cout << "ok " << name << "\n";
        } else {
            std::cout << "FAIL " << name << (detail.empty() ? "" : ": " + detail)
                      << "\n";
            ++failures;
        }
    };

    {
        brp::SplitMix64 s(1);
        check("splitmix-reference", s.next() == 0x910a2dec89025cc1ULL &&
                                        s.next() == 0xbeeb8da1658eec67ULL &&
                                        s.next() == 0xf893a2eefb32555eULL);
    }
    check("seed-derivation",
          brp::derive(RandomSeed{42}, 0).value == 0xbdd732262feb6e95ULL &&
              brp::derive(RandomSeed{42}, 1).value == 0x28efe333b266f103ULL);
    {
        const DenseMatrix g = brp::gaussian_matrix(2, 3, RandomSeed{42});
        const double want[6] = {0x1.a8ac4b546f4ffp-2,  0x1.4e2c3bafb6395p-1,
                                -0x1.c8a54f4e91a85p-1, 0x1.53ab5d4785911p+0,
                                0x1.bac69cd4142c2p+0,  -0x1.e2279a49132e3p+0};
        bool ok = true;
        for (Index i = 0; i < 2; ++i)
            for (Index j = 0; j < 3; ++j)
                ok = ok && g(i, j) == want[i * 3 + j];
        check("generator-determinism", ok);
    }
    {
        const DenseMatrix x = brp::gaussian_matrix(30, 20, RandomSeed{7});
        const auto [qm, rm] = brp::thin_qr(x);
        const DenseMatrix eye = DenseMatrix::Identity(20, 20);
        bool diag_ok = true;
        for (Index i = 0; i < 20; ++i) diag_ok = diag_ok && rm(i, i) >= 0.0;
        check("qr-invariants",
              brp::frobenius_norm(DenseMatrix(qm.transpose() * qm - eye)) <= 1e-10 &&
                  brp::frobenius_norm(DenseMatrix(qm * rm - x)) <=
                      1e-10 * brp::frobenius_norm(x) &&
                  diag_ok);
        const brp::SvdFactors f = brp::svd_full(x);
        const DenseMatrix rebuilt = f.u * f.sigma.asDiagonal() * f.v.transpose();
        check("svd-reconstruction",
              brp::frobenius_norm(DenseMatrix(rebuilt - x)) <=
                  1e-10 * brp::frobenius_norm(x));
    }
    {
        const DenseMatrix x = brp::gaussian_matrix(40, 30, RandomSeed{11});
        brp::SketchConfig cfg;
        cfg.rank = 8;
        cfg.oversample = 2;
        cfg.seed = RandomSeed{5};
        const brp::BilateralSketch s = brp::power_sketch(x, cfg);
        const DenseMatrix l1 = brp::materialize(brp::brp_approximate(s));
        const DenseMatrix l2 =
            brp::materialize(brp::power_approximate(brp::DenseOperator{x}, cfg, s));
        check("flat-power-equivalence",
              brp::frobenius_norm(DenseMatrix(l1 - l2)) <=
                  1e-10 * brp::frobenius_norm(l1));
    }
    {
        const DenseMatrix a = brp::gaussian_matrix(100, 10, RandomSeed{3});
        const DenseMatrix b = brp::gaussian_matrix(10, 100, RandomSeed{4});
        const brp::ProductOperator op(a, b);
        brp::SketchConfig cfg;
        cfg.rank = 10;
        cfg.seed = RandomSeed{6};
        const brp::LowRankFactors f = brp::rowspace_recover(op, cfg);
        const double err =
            brp::projected_product_error(a, b, brp::transpose(f.right));
        check("exact-recovery", err <= 1e-10, "error " + std::to_string(err));
    }
    {
        const DenseMatrix eye = DenseMatrix::Identity(8, 8);
        brp::SketchConfig cfg;
        cfg.rank = 8;
        cfg.seed = RandomSeed{9};
        const double err = brp::approximation_error(
            eye, brp::rowspace_recover(eye, cfg), brp::ErrorNorm::frobenius, true);
        check("identity-recovery", err <= 1e-12, "error " + std::to_string(err));
    }
    {
        const double v = brp::average_bound((Vector(2) << 2.0, 1.0).finished(), 1, 2);
        check("average-bound-value", std::abs(v - 2.6770) <= 1e-3,
              "got " + std::to_string(v));
    }
    {
        namespace fs = std::filesystem;
        const std::string path =
            (fs::temp_directory_path() / "brp_selftest_roundtrip.raw").string();
        const DenseMatrix g = brp::gaussian_matrix(17, 5, RandomSeed{13});
        brp::write_matrix(g, path, brp::MatrixFormat::raw_f64);
        const DenseMatrix back = brp::read_matrix(path, brp::MatrixFormat::raw_f64);
        std::error_code ec;
        fs::remove(path, ec);
        bool ok = back.rows() == g.rows() && back.cols() == g.cols();
        for (Index i = 0; ok && i < g.rows(); ++i)
            for (Index j = 0; ok && j < g.cols(); ++j) ok = back(i, j) == g(i, j);
        check("raw-roundtrip", ok);
    }

    if (failures == 0) {
        std::cout << "selftest: ok\n";
        return 0;
    }
    std::cout << "selftest: " << failures << " failure(s)\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomized low-rank matrix approximation toolkit"};
    app.set_version_flag("--version", std::string(brp::version_string));
    app.require_subcommand(1);

    Index rec_n = 1000, rec_rank = 50, rec_trials = 1;
    std::uint64_t rec_seed = 42;
    std::string rec_out = "recover.csv";
    auto* rec = app.add_subcommand(
        "recover", "Recover seeded low-rank products; exit 0 iff every relative "
                   "error is at most 1e-10");
    rec->add_option("--n", rec_n, "Matrix side length")->check(CLI::PositiveNumber);
    rec->add_option("--rank", rec_rank, "Rank of the generated product")
        ->check(CLI::PositiveNumber);
    rec->add_option("--seed", rec_seed, "Base seed");
    rec->add_option("--trials", rec_trials, "Number of recoveries")
        ->check(CLI::PositiveNumber);
    rec->add_option("--out", rec_out, "Output CSV path");

    Index curve_n = 400;
    std::vector<Index> curve_ranks{50, 100, 200};
    std::vector<Index> curve_qs{0, 1, 2, 3};
    std::uint64_t curve_seed = 42;
    std::string curve_out = "error_curve.csv";
    auto* curve = app.add_subcommand(
        "error-curve", "Approximation error versus rank and power exponent on a "
                       "seeded Gaussian matrix, with the truncated-SVD baseline");
    curve->add_option("--n", curve_n, "Matrix side length")
        ->check(CLI::PositiveNumber);
    curve->add_option("--ranks", curve_ranks, "Comma-separated ranks")
        ->delimiter(',');
    curve->add_option("--q-list", curve_qs, "Comma-separated power exponents")
        ->delimiter(',');
    curve->add_option("--seed", curve_seed, "Base seed");
    curve->add_option("--out", curve_out, "Output CSV path");

    std::string b_spec_file, b_spec_flag;
    Index b_rank = 5, b_oversample = 5, b_q = 0, b_trials = 100;
    double b_u = 1.0, b_t = 1.0;
    std::string b_out = "bounds.csv";
    auto* bnd = app.add_subcommand(
        "bounds", "Monte-Carlo comparison of observed spectral errors against "
                  "the per-draw, average, and deviation bounds");
    auto* spec_file_opt = bnd->add_option(
        "--spectrum-file", b_spec_file, "CSV file, one singular value per line");
    auto* spec_flag_opt = bnd->add_option(
        "--spectrum", b_spec_flag, "geometric:rho:n or power:alpha:n");
    spec_file_opt->excludes(spec_flag_opt);
    spec_flag_opt->excludes(spec_file_opt);
    bnd->add_option("--rank", b_rank, "Target rank")->check(CLI::PositiveNumber);
    bnd->add_option("--oversample", b_oversample, "Extra sketch columns")
        ->check(CLI::NonNegativeNumber);
    bnd->add_option("--q", b_q, "Power exponent")->check(CLI::NonNegativeNumber);
    bnd->add_option("--u", b_u, "Deviation parameter u (>= 1)");
    bnd->add_option("--t", b_t, "Deviation parameter t (>= 1)");
    bnd->add_option("--trials", b_trials, "Monte-Carlo trials")
        ->check(CLI::PositiveNumber);
    bnd->add_option("--out", b_out, "Output CSV path");

    std::string c_input_dir, c_out_dir = "compressed", c_report = "compress.csv";
    Index c_rank = 60, c_q = 1, c_oversample = 0;
    std::uint64_t c_seed = 42;
    auto* cmp = app.add_subcommand(
        "compress", "Rank-r compression of a directory of same-size 8-bit PGM "
                    "images by truncated SVD and by randomized approximation");
    cmp->add_option("--input-dir", c_input_dir, "Directory of .pgm images")
        ->required()
        ->check(CLI::ExistingDirectory);
    cmp->add_option("--rank", c_rank, "Compression rank")
        ->check(CLI::PositiveNumber);
    cmp->add_option("--q", c_q, "Power exponent")->check(CLI::NonNegativeNumber);
    cmp->add_option("--oversample", c_oversample, "Extra sketch columns")
        ->check(CLI::NonNegativeNumber);
    cmp->add_option("--seed", c_seed, "Base seed");
    cmp->add_option("--out-dir", c_out_dir, "Directory for compressed images");
    cmp->add_option("--report", c_report, "Output CSV path");

    auto* self = app.add_subcommand(
        "selftest", "Fast invariant suite: determinism, kernel identities, one "
                    "exact recovery");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (rec->parsed())
            return run_recover(rec_n, rec_rank, rec_seed, rec_trials, rec_out);
        if (curve->parsed())
            return run_error_curve(curve_n, curve_ranks, curve_qs, curve_seed,
                                   curve_out);
        if (bnd->parsed()) {
            if (b_spec_file.empty() && b_spec_flag.empty())
                throw brp::config_error(
                    "bounds: provide --spectrum or --spectrum-file");
            const Vector spectrum = b_spec_file.empty()
                                        ? spectrum_from_flag(b_spec_flag)
                                        : spectrum_from_file(b_spec_file);
            return run_bounds(spectrum, b_rank, b_oversample, b_q, b_u, b_t,
                              b_trials, b_out);
        }
        if (cmp->parsed())
            return run_compress(c_input_dir, c_rank, c_q, c_oversample, c_seed,
                                c_out_dir, c_report);
        if (self->parsed()) return run_selftest();
    } catch (const brp::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const brp::hypothesis_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const brp::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const brp::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const brp::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
