// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mvlift/basis_fit.hpp"
#include "mvlift/types.hpp"

#include <cstdint>

namespace mvlift {

/// Camera circle on the ground plane, looking at the origin. With the
/// default four cameras the yaws are `yaw_start + {0, 90, 180, 270}`
/// degrees: facing pairs at right angles.
struct RigSpec {
    int camera_count = 4;
    double distance_mm = 4000.0;
    double yaw_start = 0.0;
    /// Explicit yaw list; overrides the uniform spacing when non-empty.
    std::vector<double> yaws;
};

struct SubjectSpec {
    PoseBasis basis;
    /// Coefficients are drawn as N(0, (coeff_scale * sigma_i)^2).
    double coeff_scale = 1.0;
    double scale_min = 900.0;
    double scale_max = 1100.0;
    double yaw_min = 0.0;
    double yaw_max = 2.0 * M_PI;
    /// Magnitude (model units) of a perturbation orthogonal to the basis
    /// span, for subjects the model cannot represent exactly.
    double off_span = 0.0;
};

struct NoiseSpec {
    double sigma_px = 0.0;
    double outlier_rate = 0.0;
    double outlier_min_px = 20.0;
    double outlier_max_px = 100.0;
    double missing_rate = 0.0;
};

struct SceneSpec {
    RigSpec rig;
    SubjectSpec subject;
    NoiseSpec noise;
    std::uint64_t seed = 0;

    void validate() const;
};

struct JointCorruption {
    enum class Kind { Outlier, Missing };
    int camera = 0;
    int joint = 0;
    Kind kind = Kind::Outlier;
};

/// One synthetic capture: ground truth plus exact and corrupted projections.
/// Clean projections satisfy clean[c] = gt_scale * Pi * E_c * R(gt_angle) *
/// (mean + gt_coeffs . components + off_span) exactly.
struct Frame {
    Pose3D gt_pose;  ///< world mm, root-centered
    double gt_scale = 1.0;
    double gt_angle = 0.0;
    Eigen::VectorXd gt_coeffs;
    Eigen::VectorXd off_span;  ///< 3P, orthogonal to the span (zero when unused)
    std::vector<Pose2D> clean;
    std::vector<Detections2D> corrupted;
    std::vector<JointCorruption> ledger;
};

CameraRig make_rig(const RigSpec& spec);

/// Deterministic given spec.seed; frame i uses an independent substream so
/// frames can be regenerated in any order.
std::vector<Frame> generate(const SceneSpec& spec, int n_frames);

/// Re-synthesizes a frame from explicit parameters (noise from `noise_salt`
/// under the scene seed).
Frame make_frame(const SceneSpec& spec, const CameraRig& rig,
                 const Eigen::VectorXd& coeffs, double scale, double angle,
                 const Eigen::VectorXd& off_span, std::uint64_t noise_salt);

/// Linear interpolation of (coefficients, scale, off-span) with shortest-arc
/// angle interpolation; endpoints are returned verbatim. steps >= 2.
std::vector<Frame> interpolate_sequence(const SceneSpec& spec, const Frame& a,
                                        const Frame& b, int steps);

/// Procedurally deformed rest poses (lean/swing/bend families plus a little
/// jitter) on the canonical skeleton; the corpus behind the built-in basis.
PoseCorpus sample_motion_corpus(int count, std::uint64_t seed);

/// Basis fitted from a fixed-seed motion corpus; deterministic per size.
PoseBasis builtin_basis(int basis_size);

}  // namespace mvlift
