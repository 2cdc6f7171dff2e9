// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mvlift/types.hpp"

namespace mvlift {

/// Training corpus for the pose basis; all poses share one joint count.
struct PoseCorpus {
    std::vector<Pose3D> poses;

    PoseCorpus() = default;
    explicit PoseCorpus(std::vector<Pose3D> p);

    int count() const { return static_cast<int>(poses.size()); }
    int joint_count() const { return poses.empty() ? 0 : poses.front().joint_count(); }
};

/// Forward transform taken out of a pose by normalize_pose:
///   normalized = R_y(yaw) * (pose - root) / scale
struct AlignmentRecord {
    double yaw = 0.0;
    double scale = 1.0;
    Eigen::Vector3d root = Eigen::Vector3d::Zero();
};

double mean_bone_length(const Pose3D& pose, const Skeleton& skeleton);

/// Root-centers, removes ground-plane yaw (hip axis to +x) and rescales to
/// unit mean bone length. The record inverts the transform exactly.
/// Throws DegeneratePose when all joints coincide.
Pose3D normalize_pose(const Pose3D& pose, const Skeleton& skeleton,
                      AlignmentRecord* record = nullptr);

/// Inverse of normalize_pose given its record.
Pose3D apply_alignment(const Pose3D& normalized, const AlignmentRecord& record);

struct FitOptions {
    /// Run normalize_pose on every corpus pose first. Disable only for
    /// corpora that are already root-centered, yaw-aligned and scaled.
    bool normalize = true;
    Skeleton skeleton = skeleton17();
};

/// PCA fit of the pose model: mean pose, orthonormal principal components
/// (ordered by decreasing sigma) and per-component standard deviations from
/// the sample covariance. Throws RankDeficient when the corpus cannot
/// support `basis_size` components.
PoseBasis fit_basis(const PoseCorpus& corpus, int basis_size,
                    const FitOptions& options = {});

}  // namespace mvlift
