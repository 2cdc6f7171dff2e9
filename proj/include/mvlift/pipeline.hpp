// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mvlift/lifter_multi.hpp"
#include "mvlift/types.hpp"

#include <functional>

namespace mvlift {

/// What a 2D pose estimator sees at each stage: the synthetic ground-truth
/// handle (clean per-camera projections) standing in for the images, and the
/// previous stage's reprojected 2D poses (null at stage 1).
struct DetectorInput {
    int stage = 1;  ///< 1-based
    const std::vector<Pose2D>* truth = nullptr;
    const std::vector<Pose2D>* previous_guess = nullptr;
};

/// Pluggable per-stage 2D estimator: returns one detection set per camera,
/// joint count matching the basis, confidences in [0,1].
using Detector = std::function<std::vector<Detections2D>(const DetectorInput&)>;

struct PipelineContext {
    CameraRig rig;
    PoseBasis basis;
    LiftConfig config;
    /// Fusion gate: fused = beta * detected + (1-beta) * reprojected, with
    /// beta the detector confidence clamped to this range.
    double fusion_beta_min = 0.2;
    double fusion_beta_max = 0.95;
    /// Quantize fused coordinates through a render/extract heatmap round
    /// trip (integer grid), mimicking the heatmap stage boundary.
    bool heatmap_quantize = false;
    int heatmap_height = 368;
    int heatmap_width = 368;
    double heatmap_sigma = 1.0;
};

struct StageRecord {
    std::vector<Detections2D> detected;
    std::vector<Pose2D> fused;
    MultiViewLiftResult lift;
    std::vector<Pose2D> reprojections;
    bool lift_failed = false;
};

struct StageTrace {
    std::vector<StageRecord> stages;
};

/// s * Pi * E_c * pose for every camera of the rig.
std::vector<Pose2D> reproject(const Pose3D& pose, const CameraRig& rig,
                              double scale);

/// One stage: detect, fuse with the previous reprojection (stage 1 skips
/// fusion), lift, reproject. A failed lift carries the previous stage's
/// reprojections forward.
StageRecord run_stage(const PipelineContext& ctx, const Detector& detector,
                      const StageRecord* previous,
                      const std::vector<Pose2D>* truth, int stage_index);

StageTrace run_pipeline(const PipelineContext& ctx, const Detector& detector,
                        const std::vector<Pose2D>* truth, int stages = 6);

// Synthetic detectors. All are deterministic given the seed and require the
// ground-truth handle.

/// Returns the clean projections unchanged.
Detector oracle_detector();

/// Clean projections plus N(0, sigma_px^2) noise, fresh per stage.
Detector gaussian_detector(double sigma_px, std::uint64_t seed);

/// Gaussian noise plus gross displacements on a random joint subset
/// (probability `rate`, magnitude uniform in [min_px, max_px]), fresh
/// per stage.
Detector outlier_detector(double rate, double min_px, double max_px,
                          double sigma_px, std::uint64_t seed);

/// Like outlier_detector, but from stage 2 on any raw detection farther than
/// snap_radius_px from the previous-stage guess snaps back to the guess
/// (with a little noise and reduced confidence) - an estimator that exploits
/// the feedback to discard its own gross errors.
Detector guess_anchored_detector(double rate, double min_px, double max_px,
                                 double sigma_px, double snap_radius_px,
                                 std::uint64_t seed);

}  // namespace mvlift
