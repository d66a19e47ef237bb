#include "deskew/projection.hpp"

#include <algorithm>
#include <cmath>

namespace deskew {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

double sample(const MagnitudeSpectrum& m, double y, double x, Sampling sampling) {
    if (sampling == Sampling::Nearest) {
        const long yi = std::lround(y);
        const long xi = std::lround(x);
        if (yi < 0 || yi >= m.height || xi < 0 || xi >= m.width) return 0.0;
        return m.at(static_cast<int>(yi), static_cast<int>(xi));
    }
    const double yf = std::floor(y);
    const double xf = std::floor(x);
    const int y0 = static_cast<int>(yf);
    const int x0 = static_cast<int>(xf);
    const double wy = y - yf;
    const double wx = x - xf;
    auto at0 = [&](int yi, int xi) {
        if (yi < 0 || yi >= m.height || xi < 0 || xi >= m.width) return 0.0;
        return m.at(yi, xi);
    };
    return at0(y0, x0) * (1 - wy) * (1 - wx) + at0(y0, x0 + 1) * (1 - wy) * wx +
           at0(y0 + 1, x0) * wy * (1 - wx) + at0(y0 + 1, x0 + 1) * wy * wx;
}

void check_centered(const MagnitudeSpectrum& m) {
    if (!m.centered() || !m.normalized)
        throw ValidationError("radial_projection requires a centered, normalized spectrum");
}

} // namespace

AngleGrid AngleGrid::make(double theta_min, double theta_max, double step) {
    if (!(step > 0.0) || step > 0.1)
        throw ValidationError("angle step must be in (0, 0.1]");
    if (!(theta_min < theta_max))
        throw ValidationError("theta_min must be less than theta_max");
    AngleGrid g;
    g.theta_min = theta_min;
    g.theta_max = theta_max;
    g.step = step;
    const auto n = static_cast<std::size_t>(std::floor((theta_max - theta_min) / step + 1e-9)) + 1;
    g.angles.resize(n);
    for (std::size_t i = 0; i < n; ++i) g.angles[i] = theta_min + static_cast<double>(i) * step;
    return g;
}

ProjectionProfile radial_projection(const MagnitudeSpectrum& m, const AngleGrid& grid,
                                    int start_offset, Sampling sampling) {
    check_centered(m);
    const int radius = std::min(m.height, m.width);
    if (start_offset < 0 || start_offset >= radius)
        throw ValidationError("start_offset must be in [0, R)");

    ProjectionProfile p;
    p.grid = grid;
    p.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double a = grid.angles[i] * kDegToRad;
        const double dy = std::cos(a);
        const double dx = -std::sin(a);
        double acc = 0.0;
        // Descending s keeps the summation order identical to the sweep path.
        for (int s = radius; s >= start_offset; --s)
            acc += sample(m, m.c_y + s * dy, m.c_x + s * dx, sampling);
        p.values[i] = acc;
    }
    return p;
}

std::vector<ProjectionProfile> radial_projection_sweep(const MagnitudeSpectrum& m,
                                                       const AngleGrid& grid,
                                                       const std::vector<int>& start_offsets,
                                                       Sampling sampling) {
    check_centered(m);
    const int radius = std::min(m.height, m.width);
    for (int off : start_offsets)
        if (off < 0 || off >= radius)
            throw ValidationError("start_offset must be in [0, R)");

    std::vector<ProjectionProfile> out(start_offsets.size());
    for (auto& p : out) {
        p.grid = grid;
        p.values.resize(grid.size());
    }

    std::vector<double> suffix(static_cast<std::size_t>(radius) + 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double a = grid.angles[i] * kDegToRad;
        const double dy = std::cos(a);
        const double dx = -std::sin(a);
        double acc = 0.0;
        for (int s = radius; s >= 0; --s) {
            acc += sample(m, m.c_y + s * dy, m.c_x + s * dx, sampling);
            suffix[s] = acc;
        }
        for (std::size_t k = 0; k < start_offsets.size(); ++k)
            out[k].values[i] = suffix[start_offsets[k]];
    }
    return out;
}

double argmax_angle(const ProjectionProfile& profile) {
    if (profile.values.empty())
        throw ValidationError("argmax_angle: empty profile");
    std::size_t best = 0;
    for (std::size_t i = 1; i < profile.values.size(); ++i)
        if (profile.values[i] > profile.values[best]) best = i;
    return profile.grid.angles[best];
}

AggregatedAngle aggregate(double theta_a, double theta_b, double d) {
    if (!std::isfinite(theta_a) || !std::isfinite(theta_b) || !(d >= 0.0))
        throw ValidationError("aggregate: finite angles and D >= 0 required");
    // 1e-9 absorbs representation noise at the |diff| == D boundary, which
    // must choose theta_b; angle grids are far coarser than this.
    if (std::abs(theta_a - theta_b) > d + 1e-9)
        return {theta_a, Branch::Initial};
    return {theta_b, Branch::Correction};
}

} // namespace deskew
