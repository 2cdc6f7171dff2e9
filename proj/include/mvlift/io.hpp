// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mvlift/eval.hpp"
#include "mvlift/pipeline.hpp"
#include "mvlift/synth_studio.hpp"
#include "mvlift/types.hpp"

#include <string>
#include <vector>

namespace mvlift {

// All formats are line-oriented text: a "mvlift-<kind> v1" header, "#"
// comments, "key: value" fields. Numbers are written with 17 significant
// digits so every finite double round-trips exactly and repeated writes of
// the same model are byte-identical. Joint order is declared in every file
// header; the canonical 17 names are reordered to the library order on
// read, synthetic names j0, j1, ... are accepted for non-standard
// skeletons, anything else raises JointOrderUnknown.

/// %.17g rendering used by every writer.
std::string format_g17(double v);

void write_calibration(const std::string& path, const CameraRig& rig);
CameraRig read_calibration(const std::string& path);

struct DetectionsFile {
    std::vector<std::string> joint_names;
    std::vector<std::string> camera_labels;
    std::vector<std::vector<Detections2D>> frames;  ///< [frame][camera]
};
void write_detections(const std::string& path, const DetectionsFile& file);
DetectionsFile read_detections(const std::string& path);

/// 3D poses (ground truth or predictions) with optional per-frame scale,
/// ground-plane angle and corruption ledger.
struct PosesFile {
    std::vector<std::string> joint_names;
    std::vector<Pose3D> poses;
    std::vector<double> scales;  ///< NaN when absent
    std::vector<double> angles;  ///< NaN when absent
    std::vector<std::vector<JointCorruption>> ledgers;
};
void write_poses(const std::string& path, const PosesFile& file);
PosesFile read_poses(const std::string& path);

void write_basis(const std::string& path, const PoseBasis& basis,
                 const std::vector<std::string>& joint_names);
PoseBasis read_basis(const std::string& path);

/// What the trace format carries per stage (the solver internals are not
/// serialized, only the stage boundary data and the lifted pose).
struct TraceFile {
    std::vector<std::string> joint_names;
    std::vector<std::string> camera_labels;
    struct Stage {
        Pose3D pose;
        bool lift_failed = false;
        std::vector<Detections2D> detected;
        std::vector<Pose2D> fused;
        std::vector<Pose2D> reprojections;
    };
    std::vector<Stage> stages;
};
TraceFile make_trace_file(const StageTrace& trace, const CameraRig& rig,
                          const std::vector<std::string>& joint_names);
void write_trace(const std::string& path, const TraceFile& file);
TraceFile read_trace(const std::string& path);

void write_report(const std::string& path, const EvalReport& report);
EvalReport read_report(const std::string& path);

void write_ablation(const std::string& path, const AblationTable& table);
AblationTable read_ablation(const std::string& path);

/// Scene description for the simulator. `basis_ref` is either "builtin"
/// (procedural corpus, deterministic) or a basis file path relative to the
/// scene file.
struct SceneFile {
    SceneSpec spec;
    int frames = 0;
    std::string basis_ref = "builtin";
    int basis_size = 10;
};
SceneFile read_scene(const std::string& path);
void write_scene(const std::string& path, const SceneFile& file);

/// Square crop: hip-centered, covering all joints, `margin_px` on each
/// side. Throws DegenerateExtents for invalid or zero-area boxes.
struct CropBox {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double side = 0.0;
};
CropBox crop_box(const Eigen::Vector2d& min_xy, const Eigen::Vector2d& max_xy,
                 const Eigen::Vector2d& hip, double margin_px = 25.0);

/// Directory bundle written by the simulator:
/// calibration.txt, detections.txt, gt.txt, basis.txt.
struct Bundle {
    CameraRig rig;
    PoseBasis basis;
    DetectionsFile detections;
    bool has_gt = false;
    PosesFile gt;
};
void write_bundle(const std::string& dir, const std::vector<Frame>& frames,
                  const CameraRig& rig, const PoseBasis& basis,
                  const std::vector<std::string>& joint_names);
Bundle read_bundle(const std::string& dir);

/// Reconstructs per-frame Frame records (clean projections are recomputed
/// from the ground truth) so bundles feed the evaluation harness.
std::vector<Frame> frames_from_bundle(const Bundle& bundle);

}  // namespace mvlift
