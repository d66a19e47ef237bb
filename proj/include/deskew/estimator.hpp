#pragma once

#include <optional>
#include <string>
#include <utility>

#include "deskew/imageio.hpp"
#include "deskew/projection.hpp"

namespace deskew {

enum class SpectrumKind { Magnitude, Power };

/// Tunable bundle for the estimation pipeline.
struct EstimatorConfig {
    int target_height = 1024;       // H
    int window_offset = 247;        // W, correction-projection start offset
    double distance = 0.7;          // D, aggregation threshold in degrees
    double theta_min = -15.0;
    double theta_max = 15.0;
    double angle_step = 0.05;
    SpectrumKind spectrum_kind = SpectrumKind::Magnitude;
    double block_fraction = 1.0;    // 1 = whole image
    Sampling sampling = Sampling::Nearest;

    void validate() const;
    AngleGrid grid() const { return AngleGrid::make(theta_min, theta_max, angle_step); }
};

struct SkewEstimate {
    double theta_f = 0.0;
    double theta_a = 0.0;
    double theta_b = 0.0;
    Branch branch = Branch::Initial;
    std::optional<std::pair<ProjectionProfile, ProjectionProfile>> profiles;
};

/// Heights with published {H, W, D} presets: 1024, 1500, 2048, 3072, 4096.
EstimatorConfig load_preset(int height);

/// Read an EstimatorConfig from a JSON file with the same field names.
EstimatorConfig load_config_file(const std::string& path);

/// Preprocess (resize, binarize, zero-pad to square) and transform to the
/// centered, normalized spectrum the radial projections consume. The square
/// padding keeps frequency bins isotropic so spectrum angles equal image
/// angles on non-square pages.
/// Throws NoContentError when the foreground fraction is below 1e-4.
MagnitudeSpectrum prepare_spectrum(const GrayImage& img, const EstimatorConfig& cfg);

/// Full pipeline: initial projection (offset 0), correction projection
/// (offset W), aggregation of the two argmax angles.
SkewEstimate estimate_skew(const GrayImage& img, const EstimatorConfig& cfg,
                           bool want_profiles = false);

/// estimate_skew followed by a corrective rotation of -theta_f (white fill).
std::pair<GrayImage, SkewEstimate> deskew(const GrayImage& img, const EstimatorConfig& cfg);

/// Image-division variant: tile the resized binary image into N x N blocks
/// (N = round(block_fraction * height)), average the per-block normalized
/// magnitude spectra, and read the angle from the initial projection only.
/// block_fraction = 1 is the whole-image initial-projection baseline.
SkewEstimate estimate_blockwise(const GrayImage& img, const EstimatorConfig& cfg);

} // namespace deskew
