#pragma once

#include <string>
#include <utility>

#include "deskew/image.hpp"

namespace deskew {

/// Decode an image file (PNG/JPEG/TIFF/BMP) to luminance.
/// Color inputs are reduced with BT.601 weights, rounded to nearest.
/// EXIF orientation is not interpreted.
GrayImage load_gray(const std::string& path);

/// Write a grayscale PNG.
void save_png(const GrayImage& img, const std::string& path);

/// Bilinear resize to a fixed height, preserving aspect ratio.
/// Output width = max(1, round(width * target_height / height)).
GrayImage resize_to_height(const GrayImage& img, int target_height);

/// Global Otsu threshold; pixels strictly below the threshold become 1 (ink).
/// Constant images map entirely to background.
BinaryImage binarize(const GrayImage& img);

/// Canvas size of the rotated bounding box for a width x height image.
/// Returns {width, height}.
std::pair<int, int> rotated_size(int width, int height, double angle_deg);

/// Rotate about the image center onto an expanded canvas, bilinear sampling.
/// Positive angle = counter-clockwise (mathematical convention, y axis up).
/// Samples outside the source take `fill`.
GrayImage rotate(const GrayImage& img, double angle_deg, std::uint8_t fill = 255);

} // namespace deskew
