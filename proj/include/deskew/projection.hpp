#pragma once

#include <vector>

#include "deskew/spectrum.hpp"

namespace deskew {

/// Ordered candidate angles theta_min, theta_min + step, ..., <= theta_max.
struct AngleGrid {
    double theta_min = -15.0;
    double theta_max = 15.0;
    double step = 0.05;
    std::vector<double> angles;

    static AngleGrid make(double theta_min, double theta_max, double step);

    std::size_t size() const { return angles.size(); }
};

/// One projection value per grid angle.
struct ProjectionProfile {
    AngleGrid grid;
    std::vector<double> values;
};

enum class Sampling { Nearest, Bilinear };

enum class Branch { Initial, Correction };

/// Radial projection over a centered spectrum: for each grid angle theta,
/// sum M[c_y + s*cos(theta), c_x - s*sin(theta)] for s = start_offset..R,
/// R = min(H, W), unit steps; out-of-bounds samples contribute 0.
ProjectionProfile radial_projection(const MagnitudeSpectrum& m, const AngleGrid& grid,
                                    int start_offset, Sampling sampling = Sampling::Nearest);

/// One profile per requested start offset, sharing the per-angle ray walk.
/// Values are bit-identical to calling radial_projection per offset.
std::vector<ProjectionProfile> radial_projection_sweep(const MagnitudeSpectrum& m,
                                                       const AngleGrid& grid,
                                                       const std::vector<int>& start_offsets,
                                                       Sampling sampling = Sampling::Nearest);

/// Grid angle with the maximal value; ties break toward the smallest angle.
double argmax_angle(const ProjectionProfile& profile);

struct AggregatedAngle {
    double theta_f;
    Branch branch;
};

/// theta_a if |theta_a - theta_b| > d, else theta_b.
AggregatedAngle aggregate(double theta_a, double theta_b, double d);

} // namespace deskew
