#include "deskew/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "deskew/imageio.hpp"

namespace fs = std::filesystem;

namespace deskew {

namespace {

// splitmix64: deterministic across platforms, cheap to seed per item.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    bool chance(double p) { return uniform01() < p; }
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    SplitMix64 rng(seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xd1b54a32d192ed03ULL));
    rng.next();
    return rng.next();
}

const char* split_name(Split s) { return s == Split::Dev ? "dev" : "test"; }

Split split_from_name(const std::string& s) {
    if (s == "dev") return Split::Dev;
    if (s == "test") return Split::Test;
    throw FormatError("unknown split name: " + s);
}

std::string format_angle(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", a);
    return buf;
}

std::vector<std::string> list_images(const std::string& dir) {
    if (!fs::is_directory(dir))
        throw IoError("not a directory: " + dir);
    std::vector<std::string> paths;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        auto ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".tif" ||
            ext == ".tiff" || ext == ".bmp")
            paths.push_back(e.path().string());
    }
    std::sort(paths.begin(), paths.end());
    return paths;
}

} // namespace

void save_manifest(const DatasetManifest& manifest, const std::string& json_path) {
    nlohmann::json j;
    j["range"] = {{"theta_min", manifest.theta_min}, {"theta_max", manifest.theta_max}};
    j["seed"] = manifest.seed;
    auto& arr = j["entries"] = nlohmann::json::array();
    for (const auto& e : manifest.entries) {
        arr.push_back({{"image_path", e.image_path},
                       {"source_path", e.source_path},
                       {"ground_truth_angle", e.ground_truth_angle},
                       {"split", split_name(e.split)}});
    }
    std::ofstream out(json_path);
    if (!out)
        throw IoError("cannot write manifest: " + json_path);
    out << j.dump(2) << "\n";

    fs::path csv_path = fs::path(json_path).replace_extension(".csv");
    std::ofstream csv(csv_path);
    if (!csv)
        throw IoError("cannot write manifest CSV: " + csv_path.string());
    csv << "path,angle,split\n";
    for (const auto& e : manifest.entries)
        csv << e.image_path << "," << format_angle(e.ground_truth_angle) << ","
            << split_name(e.split) << "\n";
}

DatasetManifest load_manifest(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in)
        throw IoError("cannot read manifest: " + json_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad manifest " + json_path + ": " + e.what());
    }
    DatasetManifest m;
    m.theta_min = j.at("range").at("theta_min").get<double>();
    m.theta_max = j.at("range").at("theta_max").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("entries")) {
        m.entries.push_back({e.at("image_path").get<std::string>(),
                             e.at("source_path").get<std::string>(),
                             e.at("ground_truth_angle").get<double>(),
                             split_from_name(e.at("split").get<std::string>())});
    }
    return m;
}

DatasetManifest generate_skew_dataset(const std::string& straight_dir, double theta_min,
                                      double theta_max, int per_image, std::uint64_t seed,
                                      const std::string& out_dir) {
    if (per_image < 1)
        throw ValidationError("per_image must be >= 1");
    if (!(theta_min < theta_max))
        throw ValidationError("theta_min must be less than theta_max");
    const auto sources = list_images(straight_dir);
    if (sources.empty())
        throw IoError("no decodable images in " + straight_dir);

    const bool wide_range = theta_max > 15.0 || theta_min < -15.0;
    const int variants = wide_range ? per_image * 2 : per_image;

    fs::create_directories(fs::path(out_dir) / "images");

    DatasetManifest manifest;
    manifest.theta_min = theta_min;
    manifest.theta_max = theta_max;
    manifest.seed = seed;

    for (std::size_t i = 0; i < sources.size(); ++i) {
        const GrayImage src = load_gray(sources[i]);
        const std::string stem = fs::path(sources[i]).stem().string();
        for (int j = 0; j < variants; ++j) {
            SplitMix64 rng(derive_seed(seed, i, static_cast<std::uint64_t>(j)));
            double angle = rng.uniform(theta_min, theta_max);
            angle = std::round(angle * 100.0) / 100.0;

            const fs::path out_path =
                fs::path(out_dir) / "images" / (stem + "_skew" + std::to_string(j) + ".png");
            save_png(rotate(src, angle, 255), out_path.string());
            manifest.entries.push_back({out_path.string(), sources[i], angle, Split::Dev});
        }
    }

    save_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
    return manifest;
}

DatasetManifest split_dev_test(const DatasetManifest& manifest, double dev_ratio,
                               std::uint64_t seed) {
    if (!(dev_ratio > 0.0) || !(dev_ratio < 1.0))
        throw ValidationError("dev_ratio must be in (0, 1)");

    std::vector<std::string> sources;
    for (const auto& e : manifest.entries)
        if (std::find(sources.begin(), sources.end(), e.source_path) == sources.end())
            sources.push_back(e.source_path);
    if (sources.size() < 2)
        throw ValidationError("need at least 2 source images to split");

    // Fisher-Yates with a seed-derived stream; first n_dev shuffled sources go Dev.
    SplitMix64 rng(derive_seed(seed, 0x517ULL, sources.size()));
    for (std::size_t i = sources.size() - 1; i > 0; --i) {
        const std::size_t k = rng.next() % (i + 1);
        std::swap(sources[i], sources[k]);
    }
    const auto n_dev = static_cast<std::size_t>(
        std::llround(dev_ratio * static_cast<double>(sources.size())));

    DatasetManifest out = manifest;
    for (auto& e : out.entries) {
        const auto it = std::find(sources.begin(), sources.end(), e.source_path);
        const auto idx = static_cast<std::size_t>(it - sources.begin());
        e.split = idx < n_dev ? Split::Dev : Split::Test;
    }
    return out;
}

namespace {

void fill_rect(GrayImage& img, int y0, int x0, int h, int w, std::uint8_t v) {
    const int y1 = std::min(img.height, y0 + h);
    const int x1 = std::min(img.width, x0 + w);
    for (int y = std::max(0, y0); y < y1; ++y)
        for (int x = std::max(0, x0); x < x1; ++x) img.at(y, x) = v;
}

void fill_ellipse(GrayImage& img, int cy, int cx, int ry, int rx, std::uint8_t v) {
    for (int y = std::max(0, cy - ry); y <= std::min(img.height - 1, cy + ry); ++y) {
        for (int x = std::max(0, cx - rx); x <= std::min(img.width - 1, cx + rx); ++x) {
            const double dy = static_cast<double>(y - cy) / ry;
            const double dx = static_cast<double>(x - cx) / rx;
            if (dy * dy + dx * dx <= 1.0) img.at(y, x) = v;
        }
    }
}

enum class PageStyle { Plain, Messy, Hatched, TiltColumn };

// A large halftone-like band of fine bars whose direction is a fraction of
// a degree off the text direction. Random bar widths spread the energy over
// a continuous mid-frequency ridge at the bar angle, which drags the
// offset-0 projection toward it, while projections that skip the low and
// mid band still read the text lines.
void draw_hatch_patch(GrayImage& img, SplitMix64& rng, int margin_x) {
    const int h = img.height;
    const int w = img.width;
    const int y0 = static_cast<int>(h * rng.uniform(0.15, 0.25));
    const int ph = static_cast<int>(h * rng.uniform(0.58, 0.68));
    const int x0 = margin_x;
    const int x1 = w - margin_x;
    const double phi =
        (rng.chance(0.5) ? 1.0 : -1.0) * rng.uniform(0.9, 1.1) * 3.14159265358979323846 / 180.0;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double unit = h / 1024.0; // bar widths expressed at the working height

    // Run-length sequence of dark/light bars, looked up by the coordinate
    // perpendicular to the bar direction (1 px granularity).
    const double t_lo = std::min(y0 * c - x0 * s, y0 * c - x1 * s) - 4.0 * unit;
    const double t_hi = std::max((y0 + ph) * c - x0 * s, (y0 + ph) * c - x1 * s) + 4.0 * unit;
    const int bins = static_cast<int>(t_hi - t_lo) + 2;
    std::vector<std::uint8_t> dark(static_cast<std::size_t>(bins), 0);
    double pos = 0;
    bool ink = rng.chance(0.5);
    while (pos < bins) {
        const double width = rng.uniform(2.4, 4.6) * unit;
        const int end = std::min(bins, static_cast<int>(pos + width));
        if (ink)
            for (int b = static_cast<int>(pos); b < end; ++b) dark[b] = 1;
        pos += width;
        ink = !ink;
    }

    // A gentle waviness moves bar edges by a fraction of the bar width. The
    // fundamental keeps its direction while the binarization harmonics, whose
    // phase error grows with the harmonic index, decohere instead of leaving
    // a high-frequency ridge at the bar angle.
    const double amp = rng.uniform(0.6, 0.8) * unit;
    const double wavelength = w / rng.uniform(4.0, 6.0);
    const double phase = rng.uniform(0.0, 6.28318530717958648);

    fill_rect(img, y0, x0, ph, x1 - x0, 255);
    for (int y = y0; y < std::min(h, y0 + ph); ++y) {
        for (int x = x0; x < x1; ++x) {
            const double wave = amp * std::sin(6.28318530717958648 * x / wavelength + phase);
            const int b = static_cast<int>(y * c - x * s + wave - t_lo);
            if (dark[static_cast<std::size_t>(b)]) img.at(y, x) = 0;
        }
    }
}

GrayImage render_document(SplitMix64& rng, PageStyle style) {
    const bool hard = style == PageStyle::Messy;
    const int h = rng.uniform_int(800, 2400);
    const int w = std::max(500, static_cast<int>(h * rng.uniform(0.62, 0.85)));
    GrayImage img(w, h, 255);

    const int margin_x = static_cast<int>(w * rng.uniform(0.06, 0.10));
    const int margin_y = static_cast<int>(h * rng.uniform(0.05, 0.08));
    const int line_h = std::max(8, static_cast<int>(h * rng.uniform(1.0 / 70, 1.0 / 45)));
    const int pitch = line_h + static_cast<int>(line_h * rng.uniform(0.55, 1.0));
    const int ink_h = std::max(5, static_cast<int>(line_h * rng.uniform(0.65, 0.85)));

    // Hatched pages always get thin baseline rules. Their sharp profile
    // keeps the text direction visible across the whole frequency range.
    // Tilt-column pages never do: a full-width flat rule would hand the
    // page direction to estimators that only see part of the width.
    const bool ruled =
        style == PageStyle::Hatched || (style != PageStyle::TiltColumn && rng.chance(0.25));

    // Two-column layout whose narrower left column (a pasted clipping) is
    // tilted a fraction of a degree. The wider flat column carries the page
    // direction; the two angle combs only separate in the spectrum beyond
    // radius ~1/tan(beta), so estimators working at half the radial
    // aperture read a blend pulled off by the clipping.
    const bool split_cols = style == PageStyle::TiltColumn;
    const int col_split =
        split_cols ? margin_x + static_cast<int>(0.42 * (w - 2 * margin_x)) : 0;
    const double beta_slope =
        split_cols ? (rng.chance(0.5) ? 1.0 : -1.0) *
                         std::tan(rng.uniform(0.35, 0.5) * 3.14159265358979323846 / 180.0)
                   : 0.0;
    const double col_cx = split_cols ? 0.5 * (margin_x + col_split) : 0.0;
    const int rule_t = std::max(2, h / 500);
    int y = margin_y;
    while (y + line_h < h - margin_y) {
        if (rng.chance(hard ? 0.25 : 0.08)) { // paragraph break
            y += pitch;
            continue;
        }
        if (ruled && rng.chance(style == PageStyle::Hatched ? 0.4 : 0.5))
            fill_rect(img, y + line_h, margin_x, rule_t, w - 2 * margin_x,
                      style == PageStyle::Hatched ? 0 : 30);
        const auto draw_words = [&](int x_start, int x_end, bool tilted) {
            int x = x_start;
            while (x < x_end) {
                const int word = rng.uniform_int(line_h * 3 / 2, line_h * 6);
                const int len = std::min(word, x_end - x);
                const int dy = tilted ? static_cast<int>(std::lround(
                                            beta_slope * (x + 0.5 * len - col_cx)))
                                      : 0;
                if (x + word > x_end) {
                    if (rng.chance(0.5)) fill_rect(img, y + dy, x, ink_h, len, 0);
                    break;
                }
                fill_rect(img, y + dy, x, ink_h, word, 0);
                x += word + rng.uniform_int(line_h / 3, line_h);
            }
        };
        const int indent = rng.chance(0.2) ? line_h * 2 : 0;
        const int right = w - margin_x;
        if (split_cols) {
            draw_words(margin_x + indent, col_split - line_h, true);
            draw_words(col_split + (rng.chance(0.2) ? line_h * 2 : 0), right, false);
        } else {
            draw_words(margin_x + indent, right, false);
        }
        y += pitch;
    }

    // Figure blocks overwrite a band of lines.
    const int figures = hard ? rng.uniform_int(1, 3) : (rng.chance(0.3) ? 1 : 0);
    for (int f = 0; f < figures; ++f) {
        const int fh = rng.uniform_int(h / 12, h / 5);
        const int fw = rng.uniform_int(w / 5, w / 2);
        const int fy = rng.uniform_int(margin_y, std::max(margin_y + 1, h - margin_y - fh));
        const int fx = rng.uniform_int(margin_x, std::max(margin_x + 1, w - margin_x - fw));
        fill_rect(img, fy, fx, fh, fw, 255);
        fill_rect(img, fy, fx, fh, fw, rng.chance(0.5) ? 0 : 90);
    }

    // Stain blobs put broadband low-frequency energy into the spectrum.
    const int stains = hard ? rng.uniform_int(6, 14) : rng.uniform_int(0, 3);
    for (int b = 0; b < stains; ++b) {
        const int ry = rng.uniform_int(h / 120, h / 25);
        const int rx = rng.uniform_int(h / 120, h / 25);
        fill_ellipse(img, rng.uniform_int(0, h - 1), rng.uniform_int(0, w - 1), ry, rx, 60);
    }

    if (hard || rng.chance(0.2)) {
        const double density = hard ? rng.uniform(0.01, 0.03) : rng.uniform(0.002, 0.008);
        const auto n = static_cast<std::int64_t>(density * h * w);
        for (std::int64_t s = 0; s < n; ++s)
            img.at(rng.uniform_int(0, h - 1), rng.uniform_int(0, w - 1)) = 0;
    }

    if (style == PageStyle::Hatched) draw_hatch_patch(img, rng, margin_x);

    return img;
}

} // namespace

std::string synth_corpus(int count, const std::string& out_dir, std::uint64_t seed) {
    if (count < 1)
        throw ValidationError("count must be >= 1");
    fs::create_directories(out_dir);
    for (int i = 0; i < count; ++i) {
        SplitMix64 rng(derive_seed(seed, 0xc0ffee, static_cast<std::uint64_t>(i)));
        PageStyle style = PageStyle::Plain;
        if (i % 12 == 5) style = PageStyle::Hatched;
        else if (i % 12 == 8) style = PageStyle::TiltColumn;
        else if (i % 12 == 11) style = PageStyle::Messy;
        const GrayImage img = render_document(rng, style);
        char name[32];
        std::snprintf(name, sizeof name, "synth_%04d.png", i);
        save_png(img, (fs::path(out_dir) / name).string());
    }
    return out_dir;
}

} // namespace deskew
