// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mvlift/types.hpp"

namespace mvlift {

/// Per-joint spatial confidence grid; grid(row, col) = value at pixel
/// (x = col, y = row).
struct Heatmap {
    Eigen::MatrixXd grid;
    int joint = 0;
    int camera = 0;

    int height() const { return static_cast<int>(grid.rows()); }
    int width() const { return static_cast<int>(grid.cols()); }
};

/// Most confident pixel as (x, y). Ties break to the first maximum in
/// row-major scan order, so a uniform grid yields (0, 0).
Eigen::Vector2i extract_joint(const Heatmap& heatmap);

/// Unit-peak Gaussian bump centered at `point` (sub-pixel allowed),
/// truncated beyond 3 sigma. Sigma is clamped to at least 0.5 so the peak
/// cell stays dominant. Throws OutOfBounds when the point leaves
/// [0,width) x [0,height).
Heatmap render_joint(const Eigen::Vector2d& point, int height, int width,
                     double sigma_px);

/// Pushes every visible joint through render + extract, i.e. quantizes the
/// coordinates to the integer grid the way the heatmap stage boundary does.
/// Joints outside the grid are left untouched.
Pose2D quantize_via_heatmaps(const Pose2D& pose, int height, int width,
                             double sigma_px);

}  // namespace mvlift
