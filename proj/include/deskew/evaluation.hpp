#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deskew/dataset.hpp"
#include "deskew/estimator.hpp"

namespace deskew {

struct PerImageResult {
    std::string path;
    double truth = 0.0;
    double estimate = 0.0;
    double error = 0.0;
    bool failed = false;
    std::string message;
};

struct EvalReport {
    double aed = 0.0;   // mean absolute error
    double top80 = 0.0; // mean of the smallest ceil(0.8 n) errors
    double ce = 0.0;    // fraction with error <= 0.1
    double we = 0.0;    // max absolute error
    std::size_t n = 0;
    std::vector<double> sorted_errors;
    std::vector<PerImageResult> per_image;
    std::size_t failures = 0;

    std::string summary_line() const;
};

/// Which angle the pipeline reports: the Eq.-style adaptive aggregation, the
/// initial projection alone, or the correction projection alone.
enum class EstimatorMode { Adaptive, InitialOnly, CorrectionOnly };

/// AED/TOP80/CE/WE over a list of absolute errors (degrees).
EvalReport compute_metrics(const std::vector<double>& errors);

/// Run the estimator over every manifest entry in the chosen split.
/// Entries that fail (unreadable, blank) score the full range width and are
/// flagged. `threads` bounds per-image concurrency; results are
/// schedule-independent.
EvalReport evaluate_manifest(const DatasetManifest& manifest, const EstimatorConfig& cfg,
                             std::optional<Split> split_filter,
                             EstimatorMode mode = EstimatorMode::Adaptive, int threads = 1);

struct WindowSearchResult {
    int window = 0;
    std::vector<std::pair<int, double>> coarse; // (W, CE), exactly 20 rows
    std::vector<std::pair<int, double>> fine;   // (W, CE), exactly 20 rows
};

/// Two-stage search for the correction-projection offset W, scoring CE of the
/// correction-only estimator on the given split. Coarse: 20 evenly spaced
/// candidates in [0, H/3]. Fine: 20 candidates within +-(2/30)H of the coarse
/// winner, clamped to [0, H/2). Ties prefer the smaller W.
WindowSearchResult search_window(const DatasetManifest& manifest, const EstimatorConfig& cfg,
                                 std::optional<Split> split_filter, int threads = 1);

struct DistanceSearchResult {
    double distance = 0.0;
    std::vector<std::pair<double, double>> sweep; // (D, AED)
};

/// Sweep the aggregation threshold D over 0..3.0 in 0.05 steps and return the
/// AED-minimizing value; ties prefer higher CE, then smaller D.
DistanceSearchResult search_distance(const DatasetManifest& manifest, const EstimatorConfig& cfg,
                                     std::optional<Split> split_filter, int threads = 1);

/// CSV with columns rank,fraction,error,log10_error (errors floored at 1e-4
/// inside the log).
void export_error_curve(const EvalReport& report, const std::string& path);

/// Full report as JSON (metrics, sorted errors, per-image rows).
void save_report_json(const EvalReport& report, const std::string& path);

/// Per-image rows as CSV (path,truth,estimate,error,failed).
void save_report_csv(const EvalReport& report, const std::string& path);

} // namespace deskew
