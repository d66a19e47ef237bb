#include "deskew/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

#include <fftw3.h>

namespace deskew {

namespace {
// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex g_fftw_plan_mutex;
} // namespace

MagnitudeSpectrum dft2_magnitude(const BinaryImage& b) {
    if (b.width < 1 || b.height < 1)
        throw ValidationError("dft2_magnitude: empty image");

    const int h = b.height;
    const int w = b.width;
    const int wc = w / 2 + 1;

    std::vector<double> in(static_cast<std::size_t>(h) * w);
    std::copy(b.pixels.begin(), b.pixels.end(), in.begin());
    std::vector<std::complex<double>> out(static_cast<std::size_t>(h) * wc);

    {
        fftw_plan plan;
        {
            std::lock_guard lock(g_fftw_plan_mutex);
            plan = fftw_plan_dft_r2c_2d(h, w, in.data(),
                                        reinterpret_cast<fftw_complex*>(out.data()),
                                        FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
        }
        fftw_execute(plan);
        {
            std::lock_guard lock(g_fftw_plan_mutex);
            fftw_destroy_plan(plan);
        }
    }

    MagnitudeSpectrum m;
    m.height = h;
    m.width = w;
    m.values.resize(static_cast<std::size_t>(h) * w);
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < wc; ++v)
            m.at(u, v) = std::abs(out[static_cast<std::size_t>(u) * wc + v]);
        // Real input: M(u, v) = M((H-u) mod H, (W-v) mod W).
        for (int v = wc; v < w; ++v)
            m.at(u, v) = std::abs(out[static_cast<std::size_t>((h - u) % h) * wc + (w - v)]);
    }
    return m;
}

MagnitudeSpectrum normalize_and_center(const MagnitudeSpectrum& raw) {
    if (raw.centered() || raw.normalized)
        throw ValidationError("normalize_and_center expects a raw spectrum");

    const int h = raw.height;
    const int w = raw.width;
    const int cy = h / 2;
    const int cx = w / 2;

    MagnitudeSpectrum m;
    m.height = h;
    m.width = w;
    m.c_y = cy;
    m.c_x = cx;
    m.values.resize(raw.values.size());
    for (int u = 0; u < h; ++u) {
        const int nu = (u + cy) % h;
        for (int v = 0; v < w; ++v)
            m.at(nu, (v + cx) % w) = raw.at(u, v);
    }

    double maxv = 0.0;
    for (auto& v : m.values) {
        v = std::log1p(v);
        maxv = std::max(maxv, v);
    }
    if (maxv > 0.0)
        for (auto& v : m.values) v /= maxv;
    m.normalized = true;
    return m;
}

MagnitudeSpectrum power_spectrum(const MagnitudeSpectrum& raw) {
    if (raw.centered() || raw.normalized)
        throw ValidationError("power_spectrum expects a raw spectrum");
    MagnitudeSpectrum p = raw;
    for (auto& v : p.values) v *= v;
    return p;
}

} // namespace deskew
