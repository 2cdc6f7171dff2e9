// SPDX-License-Identifier: Apache-2.0
#include "mvlift/heatmaps.hpp"

#include <cmath>

namespace mvlift {

Eigen::Vector2i extract_joint(const Heatmap& heatmap) {
    if (heatmap.grid.size() == 0) {
        throw InvalidArgument("extract_joint: empty heatmap");
    }
    int best_x = 0;
    int best_y = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int y = 0; y < heatmap.height(); ++y) {
        for (int x = 0; x < heatmap.width(); ++x) {
            if (heatmap.grid(y, x) > best) {
                best = heatmap.grid(y, x);
                best_x = x;
                best_y = y;
            }
        }
    }
    return {best_x, best_y};
}

Heatmap render_joint(const Eigen::Vector2d& point, int height, int width,
                     double sigma_px) {
    if (height < 1 || width < 1 || !(sigma_px > 0.0)) {
        throw InvalidArgument("render_joint: bad grid or sigma");
    }
    if (!(point.x() >= 0.0) || !(point.x() < width) || !(point.y() >= 0.0) ||
        !(point.y() < height)) {
        throw OutOfBounds("render_joint: point outside the grid");
    }
    const double sigma = std::max(sigma_px, 0.5);
    const double cutoff = 3.0 * sigma;
    // Sub-nanopixel nudge so an exact half-pixel center rounds up through
    // extract_joint's row-major tie-break instead of down.
    const double cx = point.x() + 1e-9;
    const double cy = point.y() + 1e-9;
    Heatmap h;
    h.grid = Eigen::MatrixXd::Zero(height, width);
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - cutoff)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(cx + cutoff)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - cutoff)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(cy + cutoff)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            const double d2 = dx * dx + dy * dy;
            if (d2 > cutoff * cutoff) continue;
            h.grid(y, x) = std::exp(-0.5 * d2 / (sigma * sigma));
        }
    }
    return h;
}

Pose2D quantize_via_heatmaps(const Pose2D& pose, int height, int width,
                             double sigma_px) {
    Eigen::Matrix2Xd joints = pose.joints;
    for (int p = 0; p < pose.joint_count(); ++p) {
        if (!pose.visible(p)) continue;
        const Eigen::Vector2d pt = joints.col(p);
        if (!(pt.x() >= 0.0 && pt.x() < width && pt.y() >= 0.0 && pt.y() < height)) {
            continue;
        }
        const Eigen::Vector2i cell =
            extract_joint(render_joint(pt, height, width, sigma_px));
        joints.col(p) = cell.cast<double>();
    }
    return Pose2D(std::move(joints), pose.visibility);
}

}  // namespace mvlift
