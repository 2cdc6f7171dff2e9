// SPDX-License-Identifier: Apache-2.0
#include "mvlift/pipeline.hpp"

#include "mvlift/detail/rng.hpp"
#include "mvlift/heatmaps.hpp"

#include <cmath>

namespace mvlift {

std::vector<Pose2D> reproject(const Pose3D& pose, const CameraRig& rig,
                              double scale) {
    std::vector<Pose2D> out;
    out.reserve(rig.cameras.size());
    for (const Camera& cam : rig.cameras) {
        out.push_back(project_pose(cam, pose, scale));
    }
    return out;
}

namespace {

void check_detections(const PipelineContext& ctx,
                      const std::vector<Detections2D>& detected) {
    if (detected.size() != static_cast<size_t>(ctx.rig.camera_count())) {
        throw InvalidArgument("pipeline: detector returned wrong camera count");
    }
    for (const Detections2D& d : detected) {
        if (d.pose.joint_count() != ctx.basis.joint_count()) {
            throw JointCountMismatch("pipeline: detector joint count mismatch");
        }
        for (Eigen::Index i = 0; i < d.confidence.size(); ++i) {
            if (!(d.confidence[i] >= 0.0 && d.confidence[i] <= 1.0)) {
                throw InvalidArgument("pipeline: confidence outside [0,1]");
            }
        }
    }
}

Pose2D quantize_centered(const Pose2D& pose, const PipelineContext& ctx) {
    // Root-anchored coordinates straddle zero; shift into the grid first.
    const Eigen::Vector2d center(ctx.heatmap_width / 2.0, ctx.heatmap_height / 2.0);
    Eigen::Matrix2Xd shifted = pose.joints.colwise() + center;
    Pose2D quantized = quantize_via_heatmaps(
        Pose2D(std::move(shifted), pose.visibility), ctx.heatmap_height,
        ctx.heatmap_width, ctx.heatmap_sigma);
    Eigen::Matrix2Xd back = quantized.joints.colwise() - center;
    return Pose2D(std::move(back), pose.visibility);
}

}  // namespace

StageRecord run_stage(const PipelineContext& ctx, const Detector& detector,
                      const StageRecord* previous,
                      const std::vector<Pose2D>* truth, int stage_index) {
    DetectorInput input;
    input.stage = stage_index;
    input.truth = truth;
    input.previous_guess = previous != nullptr ? &previous->reprojections : nullptr;

    StageRecord record;
    record.detected = detector(input);
    check_detections(ctx, record.detected);

    const int joints = ctx.basis.joint_count();
    record.fused.reserve(record.detected.size());
    for (size_t c = 0; c < record.detected.size(); ++c) {
        const Detections2D& det = record.detected[c];
        if (previous == nullptr) {
            record.fused.push_back(det.pose);
            continue;
        }
        const Pose2D& guess = previous->reprojections[c];
        Eigen::Matrix2Xd fused(2, joints);
        for (int p = 0; p < joints; ++p) {
            if (!det.pose.visible(p)) {
                fused.col(p) = guess.joints.col(p);
                continue;
            }
            // Confidence exactly 1.0 bypasses the blend: a detector that
            // declares certainty keeps its coordinates, which makes perfect
            // detections an exact fixed point of the stage loop.
            const double conf = det.confidence_of(p);
            const double beta = conf == 1.0 ? 1.0
                                            : std::clamp(conf, ctx.fusion_beta_min,
                                                         ctx.fusion_beta_max);
            fused.col(p) = beta * det.pose.joints.col(p) +
                           (1.0 - beta) * guess.joints.col(p);
        }
        record.fused.push_back(Pose2D(std::move(fused)));
    }

    if (ctx.heatmap_quantize) {
        for (Pose2D& pose : record.fused) {
            pose = quantize_centered(pose, ctx);
        }
    }

    MultiViewProblem problem;
    problem.detections = record.fused;
    problem.rig = ctx.rig;
    problem.basis = ctx.basis;
    problem.config = ctx.config;
    try {
        record.lift = lift_multi(problem, RotationGrid::uniform(ctx.config.rotation_count));
        record.reprojections = reproject(record.lift.pose, ctx.rig, 1.0);
    } catch (const Error&) {
        record.lift_failed = true;
        record.reprojections =
            previous != nullptr ? previous->reprojections : record.fused;
    }
    return record;
}

StageTrace run_pipeline(const PipelineContext& ctx, const Detector& detector,
                        const std::vector<Pose2D>* truth, int stages) {
    if (stages < 1) throw InvalidArgument("run_pipeline: stages < 1");
    StageTrace trace;
    trace.stages.reserve(static_cast<size_t>(stages));
    for (int s = 1; s <= stages; ++s) {
        const StageRecord* previous = trace.stages.empty() ? nullptr : &trace.stages.back();
        trace.stages.push_back(run_stage(ctx, detector, previous, truth, s));
    }
    return trace;
}

namespace {

const std::vector<Pose2D>& require_truth(const DetectorInput& input) {
    if (input.truth == nullptr) {
        throw InvalidArgument("synthetic detector: ground-truth handle missing");
    }
    return *input.truth;
}

Detections2D with_confidence(Pose2D pose, double conf) {
    Detections2D det;
    det.confidence = Eigen::VectorXd::Constant(pose.joint_count(), conf);
    det.pose = std::move(pose);
    return det;
}

}  // namespace

Detector oracle_detector() {
    return [](const DetectorInput& input) {
        const auto& truth = require_truth(input);
        std::vector<Detections2D> out;
        out.reserve(truth.size());
        for (const Pose2D& t : truth) out.push_back(with_confidence(t, 1.0));
        return out;
    };
}

Detector gaussian_detector(double sigma_px, std::uint64_t seed) {
    return outlier_detector(0.0, 0.0, 0.0, sigma_px, seed);
}

Detector outlier_detector(double rate, double min_px, double max_px,
                          double sigma_px, std::uint64_t seed) {
    return [=](const DetectorInput& input) {
        const auto& truth = require_truth(input);
        const detail::Rng base(seed);
        std::vector<Detections2D> out;
        out.reserve(truth.size());
        for (size_t c = 0; c < truth.size(); ++c) {
            detail::Rng rng = base.fork(static_cast<std::uint64_t>(input.stage))
                                  .fork(static_cast<std::uint64_t>(c));
            Eigen::Matrix2Xd joints = truth[c].joints;
            for (int p = 0; p < truth[c].joint_count(); ++p) {
                if (sigma_px > 0.0) {
                    joints(0, p) += sigma_px * rng.normal();
                    joints(1, p) += sigma_px * rng.normal();
                }
                if (rate > 0.0 && rng.uniform() < rate) {
                    const double dir = rng.uniform(0.0, 2.0 * M_PI);
                    const double mag = rng.uniform(min_px, max_px);
                    joints(0, p) += mag * std::cos(dir);
                    joints(1, p) += mag * std::sin(dir);
                }
            }
            out.push_back(with_confidence(Pose2D(std::move(joints)), 0.95));
        }
        return out;
    };
}

Detector guess_anchored_detector(double rate, double min_px, double max_px,
                                 double sigma_px, double snap_radius_px,
                                 std::uint64_t seed) {
    const Detector raw = outlier_detector(rate, min_px, max_px, sigma_px, seed);
    return [=](const DetectorInput& input) {
        std::vector<Detections2D> out = raw(input);
        if (input.previous_guess == nullptr) return out;
        const detail::Rng base(seed ^ 0xACC0FFEEull);
        for (size_t c = 0; c < out.size(); ++c) {
            detail::Rng rng = base.fork(static_cast<std::uint64_t>(input.stage))
                                  .fork(static_cast<std::uint64_t>(c));
            const Pose2D& guess = (*input.previous_guess)[c];
            Detections2D& det = out[c];
            for (int p = 0; p < det.pose.joint_count(); ++p) {
                const Eigen::Vector2d g = guess.joints.col(p);
                if ((det.pose.joints.col(p) - g).norm() > snap_radius_px) {
                    det.pose.joints(0, p) = g.x() + 0.5 * sigma_px * rng.normal();
                    det.pose.joints(1, p) = g.y() + 0.5 * sigma_px * rng.normal();
                    det.confidence[p] = 0.6;
                }
            }
        }
        return out;
    };
}

}  // namespace mvlift
