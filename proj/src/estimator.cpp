#include "deskew/estimator.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace deskew {

namespace {

constexpr double kBlankForegroundFraction = 1e-4;

BinaryImage pad_to_square(const BinaryImage& b) {
    const int side = std::max(b.width, b.height);
    if (b.width == b.height) return b;
    BinaryImage out(side, side);
    for (int y = 0; y < b.height; ++y)
        std::copy(b.pixels.begin() + static_cast<std::size_t>(y) * b.width,
                  b.pixels.begin() + static_cast<std::size_t>(y + 1) * b.width,
                  out.pixels.begin() + static_cast<std::size_t>(y) * side);
    return out;
}

BinaryImage preprocess(const GrayImage& img, const EstimatorConfig& cfg) {
    const BinaryImage b = binarize(resize_to_height(img, cfg.target_height));
    const double fg = static_cast<double>(b.foreground_count()) / b.pixels.size();
    if (fg < kBlankForegroundFraction)
        throw NoContentError("no content: foreground fraction below 1e-4");
    return b;
}

MagnitudeSpectrum spectrum_of(const BinaryImage& b, SpectrumKind kind) {
    MagnitudeSpectrum raw = dft2_magnitude(b);
    if (kind == SpectrumKind::Power) raw = power_spectrum(raw);
    return normalize_and_center(raw);
}

} // namespace

void EstimatorConfig::validate() const {
    if (target_height < 256)
        throw ValidationError("target_height must be >= 256");
    if (window_offset < 0 || window_offset >= target_height)
        throw ValidationError("window_offset must be in [0, target_height)");
    if (!(distance >= 0.0))
        throw ValidationError("distance must be >= 0");
    if (!(theta_min < theta_max))
        throw ValidationError("theta_min must be less than theta_max");
    if (!(angle_step > 0.0) || angle_step > 0.1)
        throw ValidationError("angle_step must be in (0, 0.1]");
    if (!(block_fraction > 0.0) || block_fraction > 1.0)
        throw ValidationError("block_fraction must be in (0, 1]");
}

EstimatorConfig load_preset(int height) {
    struct Preset {
        int h;
        int w;
        double d;
    };
    static constexpr Preset presets[] = {
        {1024, 247, 0.7}, {1500, 328, 0.55}, {2048, 304, 0.55},
        {3072, 307, 0.45}, {4096, 250, 0.5},
    };
    for (const auto& p : presets) {
        if (p.h == height) {
            EstimatorConfig cfg;
            cfg.target_height = p.h;
            cfg.window_offset = p.w;
            cfg.distance = p.d;
            return cfg;
        }
    }
    throw LookupError("no preset for height " + std::to_string(height) +
                      "; valid heights: 1024, 1500, 2048, 3072, 4096");
}

EstimatorConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad config file " + path + ": " + e.what());
    }
    EstimatorConfig cfg;
    if (j.contains("target_height")) cfg.target_height = j["target_height"].get<int>();
    if (j.contains("window_offset")) cfg.window_offset = j["window_offset"].get<int>();
    if (j.contains("distance")) cfg.distance = j["distance"].get<double>();
    if (j.contains("theta_min")) cfg.theta_min = j["theta_min"].get<double>();
    if (j.contains("theta_max")) cfg.theta_max = j["theta_max"].get<double>();
    if (j.contains("angle_step")) cfg.angle_step = j["angle_step"].get<double>();
    if (j.contains("block_fraction")) cfg.block_fraction = j["block_fraction"].get<double>();
    if (j.contains("spectrum_kind")) {
        const auto s = j["spectrum_kind"].get<std::string>();
        if (s == "Magnitude")
            cfg.spectrum_kind = SpectrumKind::Magnitude;
        else if (s == "Power")
            cfg.spectrum_kind = SpectrumKind::Power;
        else
            throw FormatError("spectrum_kind must be Magnitude or Power");
    }
    if (j.contains("sampling")) {
        const auto s = j["sampling"].get<std::string>();
        if (s == "Nearest")
            cfg.sampling = Sampling::Nearest;
        else if (s == "Bilinear")
            cfg.sampling = Sampling::Bilinear;
        else
            throw FormatError("sampling must be Nearest or Bilinear");
    }
    cfg.validate();
    return cfg;
}

MagnitudeSpectrum prepare_spectrum(const GrayImage& img, const EstimatorConfig& cfg) {
    cfg.validate();
    return spectrum_of(pad_to_square(preprocess(img, cfg)), cfg.spectrum_kind);
}

SkewEstimate estimate_skew(const GrayImage& img, const EstimatorConfig& cfg, bool want_profiles) {
    const MagnitudeSpectrum m = prepare_spectrum(img, cfg);
    const AngleGrid grid = cfg.grid();
    auto profiles = radial_projection_sweep(m, grid, {0, cfg.window_offset}, cfg.sampling);

    SkewEstimate est;
    est.theta_a = argmax_angle(profiles[0]);
    est.theta_b = argmax_angle(profiles[1]);
    const AggregatedAngle agg = aggregate(est.theta_a, est.theta_b, cfg.distance);
    est.theta_f = agg.theta_f;
    est.branch = agg.branch;
    if (want_profiles)
        est.profiles = std::make_pair(std::move(profiles[0]), std::move(profiles[1]));
    return est;
}

std::pair<GrayImage, SkewEstimate> deskew(const GrayImage& img, const EstimatorConfig& cfg) {
    SkewEstimate est = estimate_skew(img, cfg);
    return {rotate(img, -est.theta_f, 255), est};
}

SkewEstimate estimate_blockwise(const GrayImage& img, const EstimatorConfig& cfg) {
    cfg.validate();

    MagnitudeSpectrum m;
    if (cfg.block_fraction == 1.0) {
        // One block = the whole image; identical to the baseline path.
        m = prepare_spectrum(img, cfg);
    } else {
        const BinaryImage b = preprocess(img, cfg);
        const int n = static_cast<int>(std::lround(cfg.block_fraction * cfg.target_height));
        if (n < 32)
            throw ValidationError("block size below 32 pixels cannot resolve the angle grid");
        const int rows = b.height / n;
        const int cols = b.width / n;
        if (rows == 0 || cols == 0)
            throw ValidationError("image smaller than one block");

        // Average of per-block log1p + max-scaled magnitudes, then centered.
        MagnitudeSpectrum acc;
        acc.height = n;
        acc.width = n;
        acc.values.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int by = 0; by < rows; ++by) {
            for (int bx = 0; bx < cols; ++bx) {
                BinaryImage block(n, n);
                for (int y = 0; y < n; ++y)
                    for (int x = 0; x < n; ++x)
                        block.at(y, x) = b.at(by * n + y, bx * n + x);
                const MagnitudeSpectrum bm = spectrum_of(block, cfg.spectrum_kind);
                for (std::size_t i = 0; i < acc.values.size(); ++i)
                    acc.values[i] += bm.values[i];
            }
        }
        const double count = static_cast<double>(rows) * cols;
        for (auto& v : acc.values) v /= count;
        acc.c_y = n / 2;
        acc.c_x = n / 2;
        acc.normalized = true;
        m = std::move(acc);
    }

    ProjectionProfile profile = radial_projection(m, cfg.grid(), 0, cfg.sampling);
    SkewEstimate est;
    est.theta_a = argmax_angle(profile);
    est.theta_b = est.theta_a;
    const AggregatedAngle agg = aggregate(est.theta_a, est.theta_b, cfg.distance);
    est.theta_f = agg.theta_f;
    est.branch = agg.branch;
    return est;
}

} // namespace deskew
