#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deskew/errors.hpp"

namespace deskew {

enum class Split { Dev, Test };

struct ManifestEntry {
    std::string image_path;
    std::string source_path;
    double ground_truth_angle = 0.0; // degrees, rounded to 0.01
    Split split = Split::Dev;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    double theta_min = -15.0;
    double theta_max = 15.0;
    std::uint64_t seed = 0;
};

/// Write manifest.json and its flat CSV mirror (path,angle,split) next to it.
void save_manifest(const DatasetManifest& manifest, const std::string& json_path);

DatasetManifest load_manifest(const std::string& json_path);

/// Rotate every straight source image by angles drawn uniformly from
/// [theta_min, theta_max] (white fill, expanded canvas) and record the
/// ground truth. Deterministic given the seed; the angle for variant j of
/// source i depends only on (seed, i, j). When the range reaches beyond
/// +-15 degrees the per-source variant count is doubled.
/// Outputs: out_dir/images/*.png, out_dir/manifest.json, out_dir/manifest.csv.
DatasetManifest generate_skew_dataset(const std::string& straight_dir, double theta_min,
                                      double theta_max, int per_image, std::uint64_t seed,
                                      const std::string& out_dir);

/// Assign splits at the source-image level so no source leaks across sets.
DatasetManifest split_dev_test(const DatasetManifest& manifest, double dev_ratio,
                               std::uint64_t seed);

/// Render `count` straight synthetic documents (text-line word blobs, ruled
/// lines, figure blocks, optional speckle) into out_dir. Returns out_dir.
std::string synth_corpus(int count, const std::string& out_dir, std::uint64_t seed);

} // namespace deskew
