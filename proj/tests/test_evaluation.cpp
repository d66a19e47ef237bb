#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "deskew/evaluation.hpp"
#include "oracles.hpp"

using namespace deskew;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "deskew_eval_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small manifest of stripe documents rotated by grid-aligned angles.
DatasetManifest stripe_manifest(const std::string& name,
                                const std::vector<double>& angles) {
    const auto dir = fresh_dir(name);
    const GrayImage doc = oracles::stripe_document(600, 450);
    DatasetManifest m;
    m.theta_min = -15.0;
    m.theta_max = 15.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const auto path = dir / ("doc" + std::to_string(i) + ".png");
        save_png(rotate(doc, angles[i], 255), path.string());
        m.entries.push_back({path.string(), "stripe", angles[i], Split::Dev});
    }
    return m;
}

} // namespace

TEST_CASE("compute_metrics on the hand-planted error list") {
    const EvalReport r = compute_metrics({0.05, 0.2, 0.08, 1.0, 0.02});
    CHECK(r.aed == doctest::Approx(0.27).epsilon(1e-12));
    CHECK(r.top80 == doctest::Approx(0.0875).epsilon(1e-12)); // ceil(0.8 * 5) = 4 values
    CHECK(r.ce == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r.we == 1.0);
    CHECK(r.n == 5);
    CHECK(r.sorted_errors.front() == 0.02);
    CHECK(r.sorted_errors.back() == 1.0);
}

TEST_CASE("compute_metrics degenerate inputs") {
    const EvalReport zeros = compute_metrics(std::vector<double>(10, 0.0));
    CHECK(zeros.aed == 0.0);
    CHECK(zeros.top80 == 0.0);
    CHECK(zeros.ce == 1.0);
    CHECK(zeros.we == 0.0);

    const EvalReport single = compute_metrics({0.1});
    CHECK(single.ce == 1.0); // threshold is inclusive

    CHECK_THROWS_AS(compute_metrics({}), ValidationError);
    CHECK_THROWS_AS(compute_metrics({-0.1}), ValidationError);
}

TEST_CASE("compute_metrics is permutation-invariant") {
    const std::vector<double> a = {0.3, 0.01, 2.0, 0.09, 0.5, 0.11};
    std::vector<double> b = {0.11, 0.5, 0.09, 2.0, 0.01, 0.3};
    const EvalReport ra = compute_metrics(a);
    const EvalReport rb = compute_metrics(b);
    CHECK(ra.aed == rb.aed);
    CHECK(ra.top80 == rb.top80);
    CHECK(ra.ce == rb.ce);
    CHECK(ra.we == rb.we);
}

TEST_CASE("adding an error above WE degrades AED and WE, never raises CE") {
    oracles::TestRng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> errors;
        for (int i = 0; i < 12; ++i) errors.push_back(rng.uniform(0.0, 1.5));
        const EvalReport before = compute_metrics(errors);
        errors.push_back(before.we + rng.uniform(0.1, 2.0));
        const EvalReport after = compute_metrics(errors);
        CHECK(after.aed > before.aed);
        CHECK(after.we > before.we);
        CHECK(after.ce <= before.ce);
        CHECK(after.top80 <= after.aed);
        CHECK(before.top80 <= before.aed);
    }
}

TEST_CASE("evaluate_manifest recovers planted rotations") {
    const DatasetManifest m = stripe_manifest("eval_basic", {0.0, 2.5, -7.35, 11.1});
    const EvalReport r =
        evaluate_manifest(m, load_preset(1024), std::nullopt, EstimatorMode::Adaptive, 2);
    CHECK(r.n == 4);
    CHECK(r.failures == 0);
    CHECK(r.ce == 1.0);
    CHECK(r.we <= 0.1);
    for (const auto& pi : r.per_image) CHECK(pi.error == std::abs(pi.estimate - pi.truth));
}

TEST_CASE("evaluate_manifest is thread-count independent") {
    const DatasetManifest m = stripe_manifest("eval_threads", {1.0, -3.6, 8.25});
    const EvalReport r1 =
        evaluate_manifest(m, load_preset(1024), std::nullopt, EstimatorMode::Adaptive, 1);
    const EvalReport r4 =
        evaluate_manifest(m, load_preset(1024), std::nullopt, EstimatorMode::Adaptive, 4);
    REQUIRE(r1.per_image.size() == r4.per_image.size());
    for (std::size_t i = 0; i < r1.per_image.size(); ++i)
        CHECK(r1.per_image[i].estimate == r4.per_image[i].estimate);
}

TEST_CASE("failed entries score the range width and do not abort the run") {
    DatasetManifest m = stripe_manifest("eval_failures", {3.0});
    m.entries.push_back({"/nonexistent/missing.png", "missing", 1.0, Split::Dev});
    const EvalReport r = evaluate_manifest(m, load_preset(1024), std::nullopt);
    CHECK(r.n == 2);
    CHECK(r.failures == 1);
    CHECK(r.we == 30.0);
}

TEST_CASE("split filter selects the requested entries") {
    DatasetManifest m = stripe_manifest("eval_split", {2.0, -2.0});
    m.entries[1].split = Split::Test;
    const EvalReport dev = evaluate_manifest(m, load_preset(1024), Split::Dev);
    CHECK(dev.n == 1);
    CHECK(dev.per_image[0].truth == 2.0);
    const EvalReport test = evaluate_manifest(m, load_preset(1024), Split::Test);
    CHECK(test.n == 1);
    CHECK(test.per_image[0].truth == -2.0);
}

TEST_CASE("summary line format") {
    const EvalReport r = compute_metrics({0.0, 0.0});
    CHECK(r.summary_line() == "AED=0.0000 TOP80=0.0000 CE=1.000 WE=0.0000 N=2");
}

TEST_CASE("window search follows the two-stage protocol") {
    const DatasetManifest m =
        stripe_manifest("search_w", {0.0, 4.05, -6.5, 9.95, -12.0, 2.2});
    const EstimatorConfig cfg = load_preset(1024);
    const WindowSearchResult ws = search_window(m, cfg, std::nullopt, 2);

    REQUIRE(ws.coarse.size() == 20);
    REQUIRE(ws.fine.size() == 20);
    CHECK(ws.coarse.front().first == 0);
    CHECK(ws.coarse.back().first == 341); // round(1024 / 3)
    CHECK(ws.window >= 0);
    CHECK(ws.window < 512);

    // winner is at least as good as the null offset
    const double ce_w0 = ws.coarse.front().second;
    double ce_winner = -1;
    for (const auto& [w, ce] : ws.coarse)
        if (w == ws.window) ce_winner = std::max(ce_winner, ce);
    for (const auto& [w, ce] : ws.fine)
        if (w == ws.window) ce_winner = std::max(ce_winner, ce);
    CHECK(ce_winner >= ce_w0);

    // fine candidates sit within the prescribed deviation of a coarse candidate
    int coarse_best = 0;
    double best_ce = -1;
    for (const auto& [w, ce] : ws.coarse)
        if (ce > best_ce || (ce == best_ce && w < coarse_best)) {
            best_ce = ce;
            coarse_best = w;
        }
    for (const auto& [w, ce] : ws.fine) {
        CHECK(w >= std::max(0.0, coarse_best - 2.0 / 30.0 * 1024 - 1));
        CHECK(w <= coarse_best + 2.0 / 30.0 * 1024 + 1);
    }
}

TEST_CASE("distance search sweeps the documented grid and dominates endpoints") {
    const DatasetManifest m = stripe_manifest("search_d", {1.0, -4.3, 7.7, -10.05});
    EstimatorConfig cfg = load_preset(1024);
    const DistanceSearchResult ds = search_distance(m, cfg, std::nullopt, 2);

    REQUIRE(ds.sweep.size() == 61);
    CHECK(ds.sweep.front().first == 0.0);
    CHECK(ds.sweep.back().first == doctest::Approx(3.0));
    double best = 1e18;
    for (const auto& [d, aed] : ds.sweep) best = std::min(best, aed);
    double chosen_aed = -1;
    for (const auto& [d, aed] : ds.sweep)
        if (d == ds.distance) chosen_aed = aed;
    CHECK(chosen_aed == best);
    CHECK(chosen_aed <= ds.sweep.front().second);
    CHECK(chosen_aed <= ds.sweep.back().second);
}

TEST_CASE("error curve export") {
    const auto dir = fresh_dir("curve");
    const EvalReport r = compute_metrics({0.05, 0.2, 0.08, 1.0, 0.02});
    const auto path = dir / "curve.csv";
    export_error_curve(r, path.string());

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "rank,fraction,error,log10_error");
    std::vector<double> errors;
    std::string line;
    double last_fraction = 0;
    while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        int rank;
        double fraction, error, log_error;
        ss >> rank >> fraction >> error >> log_error;
        errors.push_back(error);
        last_fraction = fraction;
    }
    REQUIRE(errors.size() == 5);
    CHECK(std::is_sorted(errors.begin(), errors.end()));
    CHECK(last_fraction == doctest::Approx(1.0));

    const EvalReport zeros = compute_metrics({0.0, 0.0});
    export_error_curve(zeros, path.string());
    std::ifstream in2(path);
    std::getline(in2, header);
    while (std::getline(in2, line)) {
        const auto pos = line.rfind(',');
        CHECK(std::stod(line.substr(pos + 1)) == doctest::Approx(-4.0));
    }
}

TEST_CASE("report serialization") {
    const auto dir = fresh_dir("report");
    const DatasetManifest m = stripe_manifest("report_src", {2.5});
    const EvalReport r = evaluate_manifest(m, load_preset(1024), std::nullopt);
    save_report_json(r, (dir / "report.json").string());
    save_report_csv(r, (dir / "report.csv").string());
    CHECK(fs::exists(dir / "report.json"));
    std::ifstream csv(dir / "report.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "path,truth,estimate,error,failed");
    std::string row;
    CHECK(static_cast<bool>(std::getline(csv, row)));
    CHECK(row.find(",2.50,") != std::string::npos);
}
