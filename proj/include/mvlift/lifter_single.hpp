// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mvlift/types.hpp"

namespace mvlift {

/// Outcome of the regularized least-squares fit at one ground-plane angle.
/// `pose` is always scale * R(angle) * (mean + coefficients . components),
/// recomputable from the stored parameters.
struct RotationSolution {
    double angle = 0.0;
    double scale = 0.0;
    Eigen::VectorXd coefficients;  ///< a
    Eigen::VectorXd combined;      ///< c = scale * a
    double cost = std::numeric_limits<double>::infinity();
    Pose3D pose;
    bool valid = false;
    std::string failure;  ///< empty when valid
};

/// Minimizes |I - s*Pi*E*R(angle)*(mean + a.e)|^2 + sigma^2.a^2 over (s, a)
/// for a fixed angle. By default this is one linear solve in the combined
/// unknowns (s, c = s*a) with the penalty applied to c; the exact a-penalty
/// is available via config.exact_coefficient_penalty (alternating
/// minimization). A recovered s <= 0 flags the solution invalid with
/// infinite cost instead of throwing.
/// Throws DegenerateSystem when fewer than 4 joints are visible or the
/// normal equations are singular beyond tolerance.
RotationSolution solve_rotation(const Pose2D& detections, const Camera& camera,
                                const PoseBasis& basis, double angle,
                                const LiftConfig& config = {});

struct LiftResult {
    Pose3D pose;
    RotationMode mode = RotationMode::Argmin;
    std::vector<RotationSolution> per_rotation;
    /// Softmax weights over rotations (Marginalize mode; empty for Argmin).
    /// Always sums to 1 when present.
    std::vector<double> weights;
    int argmin_index = -1;
};

/// Per-rotation softmax weights exp(-rho_eff * cost) / sum, log-stabilized.
/// Non-finite costs get weight zero. In Adaptive mode rho_eff adapts to the
/// cost spread (median - min) so the weights are shift- and scale-invariant.
std::vector<double> marginalization_weights(const std::vector<double>& costs,
                                            const LiftConfig& config);

/// Brute-force search over the rotation grid. Argmin mode returns the
/// minimum-cost solution (ties broken towards the smaller angle);
/// Marginalize mode returns the weight-averaged pose.
/// Throws AllRotationsDegenerate when no rotation yields a finite cost.
LiftResult lift_single(const Pose2D& detections, const Camera& camera,
                       const PoseBasis& basis, const RotationGrid& grid,
                       const LiftConfig& config = {});

}  // namespace mvlift
