#include "deskew/imageio.hpp"

#include <cmath>
#include <filesystem>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace deskew {

namespace {

cv::Mat to_mat(const GrayImage& img) {
    // Wraps the pixel buffer without copying; caller keeps img alive.
    return cv::Mat(img.height, img.width, CV_8UC1, const_cast<std::uint8_t*>(img.pixels.data()));
}

GrayImage from_mat(const cv::Mat& m) {
    GrayImage out(m.cols, m.rows);
    if (m.isContinuous()) {
        std::copy(m.datastart, m.dataend, out.pixels.begin());
    } else {
        for (int y = 0; y < m.rows; ++y)
            std::copy(m.ptr<std::uint8_t>(y), m.ptr<std::uint8_t>(y) + m.cols,
                      out.pixels.begin() + static_cast<std::size_t>(y) * m.cols);
    }
    return out;
}

} // namespace

GrayImage load_gray(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw IoError("cannot read file: " + path);
    cv::Mat raw = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (raw.empty())
        throw FormatError("cannot decode image: " + path);
    if (raw.rows < 1 || raw.cols < 1)
        throw ValidationError("zero-dimension image: " + path);
    if (raw.depth() == CV_16U)
        raw.convertTo(raw, CV_8U, 1.0 / 257.0);
    else if (raw.depth() != CV_8U)
        raw.convertTo(raw, CV_8U);

    if (raw.channels() == 1)
        return from_mat(raw);

    // BT.601 luminance; OpenCV decodes in BGR(A) order.
    GrayImage out(raw.cols, raw.rows);
    for (int y = 0; y < raw.rows; ++y) {
        const std::uint8_t* row = raw.ptr<std::uint8_t>(y);
        const int ch = raw.channels();
        for (int x = 0; x < raw.cols; ++x) {
            const double b = row[x * ch + 0];
            const double g = row[x * ch + 1];
            const double r = row[x * ch + 2];
            out.at(y, x) = static_cast<std::uint8_t>(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
        }
    }
    return out;
}

void save_png(const GrayImage& img, const std::string& path) {
    if (!cv::imwrite(path, to_mat(img)))
        throw IoError("cannot write PNG: " + path);
}

GrayImage resize_to_height(const GrayImage& img, int target_height) {
    if (target_height < 2)
        throw ValidationError("target_height must be >= 2");
    if (img.height == target_height)
        return img;
    const int out_w = std::max(
        1, static_cast<int>(std::lround(static_cast<double>(img.width) * target_height / img.height)));
    cv::Mat dst;
    cv::resize(to_mat(img), dst, cv::Size(out_w, target_height), 0, 0, cv::INTER_LINEAR);
    return from_mat(dst);
}

BinaryImage binarize(const GrayImage& img) {
    std::size_t hist[256] = {};
    for (auto p : img.pixels) ++hist[p];

    const std::size_t total = img.pixels.size();
    double sum_all = 0;
    for (int v = 0; v < 256; ++v) sum_all += static_cast<double>(v) * hist[v];

    // Otsu: maximize inter-class variance over thresholds T; classes are
    // {p < T} and {p >= T}. Ties resolve to the smallest T.
    int best_t = -1;
    double best_var = -1.0;
    std::size_t n0 = 0;
    double sum0 = 0;
    for (int t = 1; t < 256; ++t) {
        n0 += hist[t - 1];
        sum0 += static_cast<double>(t - 1) * hist[t - 1];
        const std::size_t n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;
        const double mu0 = sum0 / n0;
        const double mu1 = (sum_all - sum0) / n1;
        const double var = static_cast<double>(n0) * n1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }

    BinaryImage out(img.width, img.height);
    if (best_t < 0) // single gray level: no foreground
        return out;
    for (std::size_t i = 0; i < total; ++i)
        out.pixels[i] = img.pixels[i] < best_t ? 1 : 0;
    return out;
}

std::pair<int, int> rotated_size(int width, int height, double angle_deg) {
    const double a = angle_deg * CV_PI / 180.0;
    const double c = std::abs(std::cos(a));
    const double s = std::abs(std::sin(a));
    const int nw = static_cast<int>(std::ceil(width * c + height * s - 1e-9));
    const int nh = static_cast<int>(std::ceil(width * s + height * c - 1e-9));
    return {std::max(1, nw), std::max(1, nh)};
}

GrayImage rotate(const GrayImage& img, double angle_deg, std::uint8_t fill) {
    if (!std::isfinite(angle_deg))
        throw ValidationError("rotation angle must be finite");
    if (angle_deg == 0.0)
        return img;

    const auto [nw, nh] = rotated_size(img.width, img.height, angle_deg);
    const double a = angle_deg * CV_PI / 180.0;
    const double c = std::cos(a);
    const double s = std::sin(a);
    // Forward map in pixel coords (y down); positive angle is CCW with y up.
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    const double ncx = (nw - 1) / 2.0;
    const double ncy = (nh - 1) / 2.0;
    cv::Mat m = (cv::Mat_<double>(2, 3) << c, -s, ncx - (c * cx - s * cy),
                                           s,  c, ncy - (s * cx + c * cy));
    cv::Mat dst;
    cv::warpAffine(to_mat(img), dst, m, cv::Size(nw, nh), cv::INTER_LINEAR,
                   cv::BORDER_CONSTANT, cv::Scalar(fill));
    return from_mat(dst);
}

} // namespace deskew
