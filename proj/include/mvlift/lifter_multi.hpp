// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mvlift/types.hpp"

namespace mvlift {

/// One multi-view lifting instance: per-camera detections in root-anchored
/// pixel coordinates plus the rig, basis and solver configuration.
struct MultiViewProblem {
    std::vector<Pose2D> detections;
    CameraRig rig;
    PoseBasis basis;
    LiftConfig config;

    /// Throws unless: one detection set per camera, joint counts match the
    /// basis, and at least one camera sees 4+ joints.
    void validate() const;
};

/// Joint estimate of a warped shape and the model parameters behind it, for
/// one ground-plane angle. The warped shape lives in the detections'
/// coordinate units (the data term compares Pi*E*warped to pixels directly);
/// `scale` maps model units to those units.
struct WarpSolution {
    Pose3D warped;
    double scale = 0.0;
    Eigen::VectorXd coefficients;  ///< a (combined/scale; zeros if scale == 0)
    Eigen::VectorXd combined;      ///< c = scale * a
    /// Per-camera data residuals (detections - Pi*E*warped) at the final
    /// solution; zero columns for invisible joints.
    std::vector<Eigen::Matrix2Xd> residuals;
    /// Per-camera robust weights used by the final solve, in (0,1] for
    /// visible components, zero where a joint was dropped as invisible.
    std::vector<Eigen::Matrix2Xd> weights;
    /// True objective after each solve. One entry for the non-robust warp,
    /// irls_iterations + 1 entries (initial solve plus each reweighted
    /// solve) for the robust one. Non-increasing.
    std::vector<double> objective_trace;
    double cost = std::numeric_limits<double>::infinity();  ///< final objective
    double angle = 0.0;
    double epsilon = 0.0;      ///< Huber knee actually used (0 for non-robust)
    double sigma_scale = 1.0;  ///< data-units-per-model-unit penalty scaling
    bool valid = false;
    std::string failure;
};

/// Huber scalar loss: t^2/2 inside the knee, eps*|t| - eps^2/2 outside.
double huber_value(double t, double epsilon);
/// Reweighting factor min(1, eps/|t|) with w(0) = 1.
double huber_weight(double t, double epsilon);

/// Exact minimizer of
///   lambda * sum_c |I_c - Pi*E_c*Q|_2^2 / 2 + |Q - s*R*(mean + a.e)|^2
///   + sigma^2.a^2
/// over (Q, s, c = s*a), solved as one linear least-squares system (the
/// normal equations are factorized by eliminating the per-joint blocks of Q
/// and LDLT-solving the reduced system).
WarpSolution warp_frobenius(const MultiViewProblem& problem, double angle);

/// Robust variant: the quadratic data term is replaced by a Huber loss and
/// minimized with exactly config.irls_iterations reweighted least-squares
/// solves after the initial non-robust pass. In Adaptive mode the knee is
/// 1.4826 * MAD of the initial data residuals, held fixed across iterations.
WarpSolution warp_huber(const MultiViewProblem& problem, double angle);

struct MultiViewLiftResult {
    Pose3D pose;
    RotationMode mode = RotationMode::Argmin;
    std::vector<WarpSolution> per_rotation;
    std::vector<double> weights;  ///< Marginalize mode; sums to 1
    int argmin_index = -1;
};

/// Runs the configured warp at every grid angle and combines the results:
/// minimum-cost solution (Argmin) or softmax-weighted average of the warped
/// shapes (Marginalize). Throws AllRotationsDegenerate when every angle
/// fails.
MultiViewLiftResult lift_multi(const MultiViewProblem& problem,
                               const RotationGrid& grid);

/// Jacobian of the warped shape (vectorized, 3P rows) with respect to every
/// input 2D coordinate (camera-major, joint-major, x then y; one column per
/// coordinate, zero for invisible joints). Obtained by differentiating each
/// linear solve of the unrolled IRLS; the weights' dependence on the
/// residuals enters via the chain rule using the active Huber branch, and an
/// adaptive knee is treated as a constant of the problem.
Eigen::MatrixXd lift_jacobian(const MultiViewProblem& problem, double angle);

/// Central-difference reference for lift_jacobian (one warp per sign per
/// visible coordinate). Pin the Huber knee (EpsilonMode::Fixed) before
/// differencing an adaptive configuration, otherwise the knee itself moves
/// with the perturbation.
Eigen::MatrixXd lift_jacobian_fd(const MultiViewProblem& problem, double angle,
                                 double step);

}  // namespace mvlift
