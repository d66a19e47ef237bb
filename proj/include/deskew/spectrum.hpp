#pragma once

#include <vector>

#include "deskew/image.hpp"

namespace deskew {

/// 2D DFT magnitude array. Raw spectra have the DC bin at (0, 0);
/// centered spectra carry the DC coordinates (c_y, c_x).
struct MagnitudeSpectrum {
    int height = 0;
    int width = 0;
    std::vector<double> values; // row-major, non-negative
    int c_y = -1;
    int c_x = -1;
    bool normalized = false;

    bool centered() const { return c_y >= 0; }

    double& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// |F(u,v)| of the standard 2D DFT, at native size (no padding).
/// Output is raw: uncentered, unnormalized.
MagnitudeSpectrum dft2_magnitude(const BinaryImage& b);

/// Quadrant-swap DC to (floor(H/2), floor(W/2)), apply log(1+v), scale by the
/// maximum (all-zero spectra stay zero). Marks the spectrum normalized.
MagnitudeSpectrum normalize_and_center(const MagnitudeSpectrum& raw);

/// Elementwise square of a raw magnitude spectrum (P(u,v) = M(u,v)^2).
MagnitudeSpectrum power_spectrum(const MagnitudeSpectrum& raw);

} // namespace deskew
