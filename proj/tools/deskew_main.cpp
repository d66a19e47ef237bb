#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "deskew/dataset.hpp"
#include "deskew/estimator.hpp"
#include "deskew/evaluation.hpp"

namespace fs = std::filesystem;
using namespace deskew;

namespace {

int default_threads() {
    if (const char* env = std::getenv("DESKEW_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

EstimatorConfig make_config(int height, int range, double step) {
    EstimatorConfig cfg = load_preset(height);
    if (range == 45) {
        cfg.theta_min = -44.9;
        cfg.theta_max = 44.9;
    } else if (range != 15) {
        throw ValidationError("--range must be 15 or 45");
    }
    cfg.angle_step = step;
    cfg.validate();
    return cfg;
}

// The grid must cover the dataset's ground-truth range.
void widen_to_manifest(EstimatorConfig& cfg, const DatasetManifest& m) {
    cfg.theta_min = std::min(cfg.theta_min, m.theta_min);
    cfg.theta_max = std::max(cfg.theta_max, m.theta_max);
}

std::optional<Split> parse_split(const std::string& s) {
    if (s == "dev") return Split::Dev;
    if (s == "test") return Split::Test;
    if (s == "all") return std::nullopt;
    throw ValidationError("--split must be dev, test or all");
}

std::vector<std::string> gather_inputs(const std::string& input, const std::string& input_dir) {
    std::vector<std::string> paths;
    if (!input.empty()) paths.push_back(input);
    if (!input_dir.empty()) {
        for (const auto& e : fs::directory_iterator(input_dir))
            if (e.is_regular_file()) paths.push_back(e.path().string());
        std::sort(paths.begin(), paths.end());
    }
    if (paths.empty())
        throw ValidationError("no input: pass --input or --input-dir");
    return paths;
}

const char* branch_name(Branch b) { return b == Branch::Initial ? "Initial" : "Correction"; }

void dump_spectrum_png(const MagnitudeSpectrum& m, const std::string& path);

void write_profile_csv(const ProjectionProfile& p, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f)
        throw IoError("cannot write profile CSV: " + path);
    std::fprintf(f, "angle,value\n");
    for (std::size_t i = 0; i < p.values.size(); ++i)
        std::fprintf(f, "%.2f,%.9g\n", p.grid.angles[i], p.values[i]);
    std::fclose(f);
}

int cmd_estimate(const std::string& input, const std::string& input_dir, int height, int range,
                 double step, bool json, const std::string& dump_spectrum,
                 const std::string& profiles_out) {
    const EstimatorConfig cfg = make_config(height, range, step);
    const auto paths = gather_inputs(input, input_dir);

    bool any_failed = false;
    for (const auto& path : paths) {
        try {
            const GrayImage img = load_gray(path);
            if (!dump_spectrum.empty())
                dump_spectrum_png(prepare_spectrum(img, cfg), dump_spectrum);
            const SkewEstimate est = estimate_skew(img, cfg, !profiles_out.empty());
            if (!profiles_out.empty()) {
                write_profile_csv(est.profiles->first, profiles_out + "_initial.csv");
                write_profile_csv(est.profiles->second, profiles_out + "_correction.csv");
            }
            if (json) {
                nlohmann::json rec = {{"path", path},
                                      {"theta_f", est.theta_f},
                                      {"theta_a", est.theta_a},
                                      {"theta_b", est.theta_b},
                                      {"branch", branch_name(est.branch)}};
                std::cout << rec.dump() << "\n";
            } else {
                std::printf("%s\t%.2f\n", path.c_str(), est.theta_f);
            }
        } catch (const Error& e) {
            std::cerr << path << ": " << e.what() << "\n";
            any_failed = true;
        }
    }
    return any_failed ? 2 : 0;
}

int cmd_deskew(const std::string& input, const std::string& output, int height, int range) {
    const EstimatorConfig cfg = make_config(height, range, 0.05);
    GrayImage img;
    try {
        img = load_gray(input);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    try {
        auto [corrected, est] = deskew::deskew(img, cfg);
        save_png(corrected, output);
        std::printf("%.2f\n", est.theta_f);
    } catch (const NoContentError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 0;
}

int cmd_evaluate(const std::string& manifest_path, int height, const std::string& split,
                 const std::string& report_out, const std::string& curve_out, int threads) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    EstimatorConfig cfg = load_preset(height);
    widen_to_manifest(cfg, manifest);
    const EvalReport report =
        evaluate_manifest(manifest, cfg, parse_split(split), EstimatorMode::Adaptive, threads);
    if (!report_out.empty()) save_report_json(report, report_out);
    if (!curve_out.empty()) export_error_curve(report, curve_out);
    std::cout << report.summary_line() << "\n";
    return report.failures > 0 ? 2 : 0;
}

int cmd_search_params(const std::string& manifest_path, int height, const std::string& split,
                      const std::string& sweep_out, int threads) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    EstimatorConfig cfg = load_preset(height);
    widen_to_manifest(cfg, manifest);
    const auto filter = parse_split(split);

    const WindowSearchResult ws = search_window(manifest, cfg, filter, threads);
    cfg.window_offset = ws.window;
    const DistanceSearchResult ds = search_distance(manifest, cfg, filter, threads);

    if (!sweep_out.empty()) {
        std::FILE* f = std::fopen(sweep_out.c_str(), "w");
        if (!f)
            throw IoError("cannot write sweep table: " + sweep_out);
        std::fprintf(f, "stage,value,score\n");
        for (const auto& [w, ce] : ws.coarse) std::fprintf(f, "coarse,%d,%.6f\n", w, ce);
        for (const auto& [w, ce] : ws.fine) std::fprintf(f, "fine,%d,%.6f\n", w, ce);
        for (const auto& [d, aed] : ds.sweep) std::fprintf(f, "distance,%.2f,%.6f\n", d, aed);
        std::fclose(f);
    }

    std::printf("coarse_candidates=%zu\n", ws.coarse.size());
    std::printf("fine_candidates=%zu\n", ws.fine.size());
    std::printf("W=%d\n", ws.window);
    std::printf("D=%.2f\n", ds.distance);
    return 0;
}

int cmd_ablate(const std::string& mode, const std::string& manifest_path, int height,
               const std::string& values, const std::string& split, int threads) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    const auto filter = parse_split(split);
    EstimatorConfig base = load_preset(height);
    widen_to_manifest(base, manifest);

    std::vector<std::string> items;
    for (std::size_t pos = 0; pos < values.size();) {
        const auto comma = values.find(',', pos);
        items.push_back(values.substr(pos, comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }

    std::printf("value,aed,top80,ce,we\n");
    auto print_row = [](const std::string& label, const EvalReport& r) {
        std::printf("%s,%.4f,%.4f,%.3f,%.4f\n", label.c_str(), r.aed, r.top80, r.ce, r.we);
    };

    if (mode == "division") {
        if (items.empty())
            throw ValidationError("--values required for division mode");
        for (const auto& item : items) {
            EstimatorConfig cfg = base;
            cfg.block_fraction = std::stod(item);
            const EvalReport r = evaluate_manifest(
                manifest, cfg, filter,
                cfg.block_fraction < 1.0 ? EstimatorMode::Adaptive : EstimatorMode::InitialOnly,
                threads);
            print_row(item, r);
        }
    } else if (mode == "power") {
        for (const SpectrumKind kind : {SpectrumKind::Magnitude, SpectrumKind::Power}) {
            EstimatorConfig cfg = base;
            cfg.spectrum_kind = kind;
            const EvalReport r =
                evaluate_manifest(manifest, cfg, filter, EstimatorMode::InitialOnly, threads);
            print_row(kind == SpectrumKind::Magnitude ? "Magnitude" : "Power", r);
        }
    } else if (mode == "window") {
        if (items.empty())
            throw ValidationError("--values required for window mode");
        for (const auto& item : items) {
            EstimatorConfig cfg = base;
            cfg.window_offset = std::stoi(item);
            const EvalReport r =
                evaluate_manifest(manifest, cfg, filter, EstimatorMode::CorrectionOnly, threads);
            print_row(item, r);
        }
    } else {
        throw ValidationError("--mode must be division, power or window");
    }
    return 0;
}

} // namespace

#include <opencv2/imgcodecs.hpp>

namespace {
void dump_spectrum_png(const MagnitudeSpectrum& m, const std::string& path) {
    cv::Mat out(m.height, m.width, CV_16UC1);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            out.at<std::uint16_t>(y, x) =
                static_cast<std::uint16_t>(std::lround(m.at(y, x) * 65535.0));
    if (!cv::imwrite(path, out))
        throw IoError("cannot write spectrum dump: " + path);
}
} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Document skew estimation via adaptive radial projection on the Fourier "
                 "magnitude spectrum"};
    app.require_subcommand(1);
    int threads = default_threads();
    app.add_option("--threads", threads, "Per-image worker threads")->capture_default_str();

    // estimate
    std::string est_input, est_input_dir, est_dump, est_profiles;
    int est_height = 1024, est_range = 15;
    double est_step = 0.05;
    bool est_json = false;
    auto* est = app.add_subcommand("estimate", "Estimate the skew angle of images");
    est->add_option("--input", est_input, "Single image path");
    est->add_option("--input-dir", est_input_dir, "Directory of images");
    est->add_option("--height", est_height, "Preset height")->capture_default_str();
    est->add_option("--range", est_range, "Angle range: 15 or 45")->capture_default_str();
    est->add_option("--step", est_step, "Angle grid step in degrees")->capture_default_str();
    est->add_flag("--json", est_json, "Emit one JSON record per image");
    est->add_option("--dump-spectrum", est_dump, "Write the centered spectrum as 16-bit PNG");
    est->add_option("--profiles-out", est_profiles,
                    "Prefix for <prefix>_initial.csv / <prefix>_correction.csv");

    // deskew
    std::string dsk_input, dsk_output;
    int dsk_height = 1024, dsk_range = 15;
    auto* dsk = app.add_subcommand("deskew", "Estimate and correct a single image");
    dsk->add_option("--input", dsk_input)->required();
    dsk->add_option("--output", dsk_output)->required();
    dsk->add_option("--height", dsk_height)->capture_default_str();
    dsk->add_option("--range", dsk_range)->capture_default_str();

    // generate
    std::string gen_source, gen_out;
    int gen_range = 15, gen_per_image = 5;
    std::uint64_t gen_seed = 0;
    auto* gen = app.add_subcommand("generate", "Generate a skewed dataset with ground truth");
    gen->add_option("--source-dir", gen_source)->required();
    gen->add_option("--range", gen_range, "15 or 45")->capture_default_str();
    gen->add_option("--per-image", gen_per_image)->capture_default_str();
    gen->add_option("--seed", gen_seed)->capture_default_str();
    gen->add_option("--out", gen_out)->required();

    // synth
    std::string synth_out;
    int synth_count = 50;
    std::uint64_t synth_seed = 0;
    auto* synth = app.add_subcommand("synth", "Render straight synthetic documents");
    synth->add_option("--count", synth_count)->capture_default_str();
    synth->add_option("--out", synth_out)->required();
    synth->add_option("--seed", synth_seed)->capture_default_str();

    // split
    std::string split_manifest;
    double split_ratio = 0.7;
    std::uint64_t split_seed = 0;
    auto* spl = app.add_subcommand("split", "Assign dev/test splits at the source level");
    spl->add_option("--manifest", split_manifest)->required();
    spl->add_option("--dev-ratio", split_ratio)->capture_default_str();
    spl->add_option("--seed", split_seed)->capture_default_str();

    // evaluate
    std::string ev_manifest, ev_split = "all", ev_report, ev_curve;
    int ev_height = 1024;
    auto* ev = app.add_subcommand("evaluate", "Run the estimator over a manifest");
    ev->add_option("--manifest", ev_manifest)->required();
    ev->add_option("--height", ev_height)->capture_default_str();
    ev->add_option("--split", ev_split, "dev, test or all")->capture_default_str();
    ev->add_option("--report", ev_report, "Write full JSON report");
    ev->add_option("--curve", ev_curve, "Write sorted-error-curve CSV");

    // search-params
    std::string sp_manifest, sp_split = "dev", sp_sweep;
    int sp_height = 1024;
    auto* sp = app.add_subcommand("search-params", "Two-stage W search plus D sweep");
    sp->add_option("--manifest", sp_manifest)->required();
    sp->add_option("--height", sp_height)->capture_default_str();
    sp->add_option("--split", sp_split)->capture_default_str();
    sp->add_option("--sweep-out", sp_sweep, "Write the full sweep table as CSV");

    // ablate
    std::string ab_mode, ab_manifest, ab_values, ab_split = "all";
    int ab_height = 1024;
    auto* ab = app.add_subcommand("ablate", "Evaluate estimator variants");
    ab->add_option("--mode", ab_mode, "division, power or window")->required();
    ab->add_option("--manifest", ab_manifest)->required();
    ab->add_option("--height", ab_height)->capture_default_str();
    ab->add_option("--values", ab_values, "Comma-separated list for the chosen mode");
    ab->add_option("--split", ab_split)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (est->parsed())
            return cmd_estimate(est_input, est_input_dir, est_height, est_range, est_step,
                                est_json, est_dump, est_profiles);
        if (dsk->parsed()) return cmd_deskew(dsk_input, dsk_output, dsk_height, dsk_range);
        if (gen->parsed()) {
            const double half = gen_range == 45 ? 44.9 : 15.0;
            if (gen_range != 15 && gen_range != 45)
                throw ValidationError("--range must be 15 or 45");
            generate_skew_dataset(gen_source, -half, half, gen_per_image, gen_seed, gen_out);
            return 0;
        }
        if (synth->parsed()) {
            synth_corpus(synth_count, synth_out, synth_seed);
            return 0;
        }
        if (spl->parsed()) {
            const DatasetManifest m =
                split_dev_test(load_manifest(split_manifest), split_ratio, split_seed);
            save_manifest(m, split_manifest);
            return 0;
        }
        if (ev->parsed())
            return cmd_evaluate(ev_manifest, ev_height, ev_split, ev_report, ev_curve, threads);
        if (sp->parsed())
            return cmd_search_params(sp_manifest, sp_height, sp_split, sp_sweep, threads);
        if (ab->parsed())
            return cmd_ablate(ab_mode, ab_manifest, ab_height, ab_values, ab_split, threads);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
