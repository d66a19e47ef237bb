#include "deskew/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>

#include <json.hpp>

#include "parallel.hpp"

namespace deskew {

namespace {

std::vector<const ManifestEntry*> select_entries(const DatasetManifest& manifest,
                                                 std::optional<Split> split_filter) {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : manifest.entries)
        if (!split_filter || e.split == *split_filter) out.push_back(&e);
    return out;
}

void finalize(EvalReport& r) {
    r.n = r.sorted_errors.size();
    std::sort(r.sorted_errors.begin(), r.sorted_errors.end());
    double sum = 0;
    std::size_t correct = 0;
    for (double e : r.sorted_errors) {
        sum += e;
        if (e <= 0.1) ++correct;
    }
    r.aed = sum / static_cast<double>(r.n);
    r.ce = static_cast<double>(correct) / static_cast<double>(r.n);
    r.we = r.sorted_errors.back();
    const auto k = static_cast<std::size_t>(
        std::ceil(0.8 * static_cast<double>(r.n)) + 0.5);
    double top = 0;
    for (std::size_t i = 0; i < k; ++i) top += r.sorted_errors[i];
    r.top80 = top / static_cast<double>(k);
}

} // namespace

std::string EvalReport::summary_line() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "AED=%.4f TOP80=%.4f CE=%.3f WE=%.4f N=%zu", aed, top80, ce,
                  we, n);
    return buf;
}

EvalReport compute_metrics(const std::vector<double>& errors) {
    if (errors.empty())
        throw ValidationError("compute_metrics: empty error list");
    for (double e : errors)
        if (!(e >= 0.0))
            throw ValidationError("compute_metrics: errors must be non-negative");
    EvalReport r;
    r.sorted_errors = errors;
    finalize(r);
    return r;
}

EvalReport evaluate_manifest(const DatasetManifest& manifest, const EstimatorConfig& cfg,
                             std::optional<Split> split_filter, EstimatorMode mode, int threads) {
    cfg.validate();
    const auto entries = select_entries(manifest, split_filter);
    if (entries.empty())
        throw ValidationError("evaluate_manifest: no entries in the selected split");

    const double fail_error = cfg.theta_max - cfg.theta_min;
    std::vector<PerImageResult> results(entries.size());
    detail::parallel_for(entries.size(), threads, [&](std::size_t i) {
        const ManifestEntry& e = *entries[i];
        PerImageResult& r = results[i];
        r.path = e.image_path;
        r.truth = e.ground_truth_angle;
        try {
            const GrayImage img = load_gray(e.image_path);
            const SkewEstimate est = cfg.block_fraction < 1.0 ? estimate_blockwise(img, cfg)
                                                              : estimate_skew(img, cfg);
            switch (mode) {
                case EstimatorMode::Adaptive: r.estimate = est.theta_f; break;
                case EstimatorMode::InitialOnly: r.estimate = est.theta_a; break;
                case EstimatorMode::CorrectionOnly: r.estimate = est.theta_b; break;
            }
            r.error = std::abs(r.estimate - r.truth);
        } catch (const Error& ex) {
            r.failed = true;
            r.message = ex.what();
            r.error = fail_error;
        }
    });

    EvalReport report;
    report.per_image = std::move(results);
    for (const auto& r : report.per_image) {
        report.sorted_errors.push_back(r.error);
        if (r.failed) ++report.failures;
    }
    finalize(report);
    return report;
}

namespace {

// CE of the correction-only estimator for every offset candidate, sharing one
// spectrum per image across the whole candidate set.
std::vector<double> correction_ce_per_offset(const std::vector<const ManifestEntry*>& entries,
                                             const EstimatorConfig& cfg,
                                             const std::vector<int>& offsets, int threads) {
    const AngleGrid grid = cfg.grid();
    std::vector<std::vector<bool>> correct(entries.size());
    detail::parallel_for(entries.size(), threads, [&](std::size_t i) {
        auto& row = correct[i];
        row.assign(offsets.size(), false);
        try {
            const GrayImage img = load_gray(entries[i]->image_path);
            const MagnitudeSpectrum m = prepare_spectrum(img, cfg);
            const auto profiles = radial_projection_sweep(m, grid, offsets, cfg.sampling);
            for (std::size_t k = 0; k < offsets.size(); ++k) {
                const double est = argmax_angle(profiles[k]);
                row[k] = std::abs(est - entries[i]->ground_truth_angle) <= 0.1;
            }
        } catch (const Error&) {
            // failed image counts as incorrect for every candidate
        }
    });

    std::vector<double> ce(offsets.size(), 0.0);
    for (const auto& row : correct)
        for (std::size_t k = 0; k < offsets.size(); ++k)
            if (row[k]) ce[k] += 1.0;
    for (auto& v : ce) v /= static_cast<double>(entries.size());
    return ce;
}

std::size_t best_ce_index(const std::vector<int>& offsets, const std::vector<double>& ce) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < offsets.size(); ++k) {
        if (ce[k] > ce[best] || (ce[k] == ce[best] && offsets[k] < offsets[best])) best = k;
    }
    return best;
}

} // namespace

WindowSearchResult search_window(const DatasetManifest& manifest, const EstimatorConfig& cfg,
                                 std::optional<Split> split_filter, int threads) {
    cfg.validate();
    const auto entries = select_entries(manifest, split_filter);
    if (entries.empty())
        throw ValidationError("search_window: no entries in the selected split");

    const int h = cfg.target_height;
    WindowSearchResult result;

    std::vector<int> coarse(20);
    for (int i = 0; i < 20; ++i)
        coarse[i] = static_cast<int>(std::lround(i * (h / 3.0) / 19.0));
    const auto coarse_ce = correction_ce_per_offset(entries, cfg, coarse, threads);
    for (int i = 0; i < 20; ++i) result.coarse.emplace_back(coarse[i], coarse_ce[i]);
    const std::size_t ci = best_ce_index(coarse, coarse_ce);
    const int w1 = coarse[ci];

    const double dev = 2.0 / 30.0 * h;
    std::vector<int> fine(20);
    for (int i = 0; i < 20; ++i) {
        const double v = (w1 - dev) + i * (2.0 * dev) / 19.0;
        fine[i] = std::clamp(static_cast<int>(std::lround(v)), 0, h / 2 - 1);
    }
    const auto fine_ce = correction_ce_per_offset(entries, cfg, fine, threads);
    for (int i = 0; i < 20; ++i) result.fine.emplace_back(fine[i], fine_ce[i]);

    // Best over the fine candidates and the coarse winner.
    const std::size_t fi = best_ce_index(fine, fine_ce);
    result.window = fine[fi];
    if (coarse_ce[ci] > fine_ce[fi] ||
        (coarse_ce[ci] == fine_ce[fi] && w1 < fine[fi]))
        result.window = w1;
    return result;
}

DistanceSearchResult search_distance(const DatasetManifest& manifest, const EstimatorConfig& cfg,
                                     std::optional<Split> split_filter, int threads) {
    cfg.validate();
    const auto entries = select_entries(manifest, split_filter);
    if (entries.empty())
        throw ValidationError("search_distance: no entries in the selected split");

    struct Pair {
        double theta_a = 0, theta_b = 0;
        bool failed = false;
    };
    std::vector<Pair> pairs(entries.size());
    detail::parallel_for(entries.size(), threads, [&](std::size_t i) {
        try {
            const GrayImage img = load_gray(entries[i]->image_path);
            const SkewEstimate est = estimate_skew(img, cfg);
            pairs[i] = {est.theta_a, est.theta_b, false};
        } catch (const Error&) {
            pairs[i].failed = true;
        }
    });

    const double fail_error = cfg.theta_max - cfg.theta_min;
    DistanceSearchResult result;
    double best_aed = 0, best_ce = -1;
    for (int k = 0; k <= 60; ++k) {
        const double d = k * 0.05;
        double sum = 0;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            double err;
            if (pairs[i].failed) {
                err = fail_error;
            } else {
                const double est = aggregate(pairs[i].theta_a, pairs[i].theta_b, d).theta_f;
                err = std::abs(est - entries[i]->ground_truth_angle);
            }
            sum += err;
            if (err <= 0.1) ++correct;
        }
        const double aed = sum / static_cast<double>(pairs.size());
        const double ce = static_cast<double>(correct) / static_cast<double>(pairs.size());
        result.sweep.emplace_back(d, aed);
        if (best_ce < 0 || aed < best_aed || (aed == best_aed && ce > best_ce)) {
            best_aed = aed;
            best_ce = ce;
            result.distance = d;
        }
    }
    return result;
}

void export_error_curve(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write error curve: " + path);
    out << "rank,fraction,error,log10_error\n";
    char buf[128];
    for (std::size_t i = 0; i < report.sorted_errors.size(); ++i) {
        const double e = report.sorted_errors[i];
        const double frac = static_cast<double>(i + 1) / static_cast<double>(report.n);
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f\n", i + 1, frac, e,
                      std::log10(std::max(e, 1e-4)));
        out << buf;
    }
}

void save_report_json(const EvalReport& report, const std::string& path) {
    nlohmann::json j;
    j["aed"] = report.aed;
    j["top80"] = report.top80;
    j["ce"] = report.ce;
    j["we"] = report.we;
    j["n"] = report.n;
    j["failures"] = report.failures;
    j["sorted_errors"] = report.sorted_errors;
    auto& arr = j["per_image"] = nlohmann::json::array();
    for (const auto& r : report.per_image) {
        nlohmann::json row = {{"path", r.path},
                              {"truth", r.truth},
                              {"estimate", r.estimate},
                              {"error", r.error},
                              {"failed", r.failed}};
        if (r.failed) row["message"] = r.message;
        arr.push_back(std::move(row));
    }
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write report: " + path);
    out << j.dump(2) << "\n";
}

void save_report_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write report CSV: " + path);
    out << "path,truth,estimate,error,failed\n";
    char buf[64];
    for (const auto& r : report.per_image) {
        std::snprintf(buf, sizeof buf, ",%.2f,%.2f,%.4f,%d\n", r.truth, r.estimate, r.error,
                      r.failed ? 1 : 0);
        out << r.path << buf;
    }
}

} // namespace deskew
