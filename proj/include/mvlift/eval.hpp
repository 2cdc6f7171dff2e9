// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mvlift/lifter_multi.hpp"
#include "mvlift/synth_studio.hpp"
#include "mvlift/types.hpp"

namespace mvlift {

/// Protocol-1 error: mean per-joint Euclidean distance after aligning the
/// root joints (translation only; the orthographic model recovers no
/// absolute translation, so a common origin is required).
double mpjpe_p1(const Pose3D& pred, const Pose3D& gt);

struct Similarity {
    double scale = 1.0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
        return scale * (rotation * x) + translation;
    }
};

/// Least-squares similarity (rotation + translation + uniform scale)
/// aligning `from` onto `to` over the given joint subset (empty = all).
/// Reflections are excluded via the usual determinant correction.
/// Throws DegenerateAlignment when the cross-covariance is rank deficient.
Similarity procrustes_align(const Pose3D& from, const Pose3D& to,
                            const std::vector<int>& subset = {});

/// Protocol-2 error: mean per-joint distance on the subset after Procrustes
/// alignment of the prediction onto the ground truth.
double mpjpe_p2(const Pose3D& pred, const Pose3D& gt,
                const std::vector<int>& subset = {});

struct EvalReport {
    std::vector<double> per_frame_mm;
    Eigen::VectorXd per_joint_mm;
    double mean_mm = 0.0;
    double median_mm = 0.0;
    std::vector<double> sorted_curve;  ///< non-decreasing error samples
    int protocol = 1;
    int joint_subset_size = 0;  ///< joints per frame entering the metric
    std::string config_fingerprint;
};

/// Scores predictions against ground truth under one protocol.
/// subset applies to protocol 2 (and restricts the per-joint table).
EvalReport evaluate_frames(const std::vector<Pose3D>& pred,
                           const std::vector<Pose3D>& gt, int protocol,
                           const std::vector<int>& subset = {},
                           std::string fingerprint = {});

struct FloorReport {
    double p1_mm = 0.0;
    double p2_mm = 0.0;
};

/// Reconstruction error of the full lifter on the frames' clean
/// projections: near zero for in-span subjects, the model-plus-span error
/// otherwise.
FloorReport gt_triangulation_floor(const std::vector<Frame>& frames,
                                   const CameraRig& rig, const PoseBasis& basis,
                                   LiftConfig config = {}, int threads = 1);

struct AblationRow {
    RobustMode robust_mode = RobustMode::Frobenius;
    RotationMode rotation_mode = RotationMode::Argmin;
    int camera_count = 0;
    double p1_mean = 0.0;
    double p1_std = 0.0;  ///< over 2-camera pairs; 0 for full-rig rows
    double p2_mean = 0.0;
    double p2_std = 0.0;
    int failed_frames = 0;
    std::string label;
};

struct AblationTable {
    std::vector<AblationRow> rows;
};

/// Cross product {Frobenius, Huber} x {Argmin, Marginalize} on the full rig
/// plus the robust/marginalized configuration on every right-angle
/// two-camera pair (mean +/- std across pairs). Per-frame lifter failures
/// are counted, not fatal.
AblationTable ablate(const std::vector<Frame>& frames, const CameraRig& rig,
                     const PoseBasis& basis, const LiftConfig& base_config,
                     int threads = 1);

/// Indices of camera pairs whose viewing directions are a quarter turn
/// apart (right angles), by rig order.
std::vector<std::array<int, 2>> right_angle_pairs(const CameraRig& rig);

}  // namespace mvlift
