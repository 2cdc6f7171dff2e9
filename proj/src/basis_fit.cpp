// SPDX-License-Identifier: Apache-2.0
#include "mvlift/basis_fit.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace mvlift {

PoseCorpus::PoseCorpus(std::vector<Pose3D> p) : poses(std::move(p)) {
    if (poses.empty()) {
        throw InvalidArgument("PoseCorpus: empty");
    }
    const int joints = poses.front().joint_count();
    for (const Pose3D& pose : poses) {
        if (pose.joint_count() != joints) {
            throw JointCountMismatch("PoseCorpus: mixed joint counts");
        }
    }
}

double mean_bone_length(const Pose3D& pose, const Skeleton& skeleton) {
    if (skeleton.bones.empty()) {
        throw InvalidArgument("mean_bone_length: skeleton has no bones");
    }
    double total = 0.0;
    for (const auto& bone : skeleton.bones) {
        total += (pose.joints.col(bone[0]) - pose.joints.col(bone[1])).norm();
    }
    return total / static_cast<double>(skeleton.bones.size());
}

Pose3D normalize_pose(const Pose3D& pose, const Skeleton& skeleton,
                      AlignmentRecord* record) {
    if (pose.joint_count() != skeleton.joint_count()) {
        throw JointCountMismatch("normalize_pose: pose does not match skeleton");
    }
    AlignmentRecord rec;
    rec.root = pose.joints.col(skeleton.root);
    Eigen::Matrix3Xd centered = pose.joints.colwise() - rec.root;
    if (centered.cwiseAbs().maxCoeff() < 1e-12) {
        throw DegeneratePose("normalize_pose: all joints coincide");
    }
    if (skeleton.left_hip >= 0 && skeleton.right_hip >= 0) {
        const Eigen::Vector3d axis =
            centered.col(skeleton.left_hip) - centered.col(skeleton.right_hip);
        // atan2(0,0) = 0: a vertical hip axis leaves yaw at zero.
        rec.yaw = std::atan2(axis.z(), axis.x());
        centered = rotation_about_y(rec.yaw) * centered;
    }
    rec.scale = mean_bone_length(Pose3D(centered), skeleton);
    if (!(rec.scale > 0.0)) {
        throw DegeneratePose("normalize_pose: zero mean bone length");
    }
    centered /= rec.scale;
    if (record != nullptr) *record = rec;
    return Pose3D(std::move(centered));
}

Pose3D apply_alignment(const Pose3D& normalized, const AlignmentRecord& record) {
    Eigen::Matrix3Xd joints =
        rotation_about_y(-record.yaw) * (record.scale * normalized.joints);
    joints.colwise() += record.root;
    return Pose3D(std::move(joints));
}

PoseBasis fit_basis(const PoseCorpus& corpus, int basis_size,
                    const FitOptions& options) {
    if (basis_size < 1) {
        throw InvalidArgument("fit_basis: basis_size must be positive");
    }
    const int joints = corpus.joint_count();
    const int dim = 3 * joints;
    const int count = corpus.count();
    if (count < basis_size + 1 || basis_size > dim) {
        throw RankDeficient("fit_basis: corpus too small for requested basis size");
    }

    Eigen::MatrixXd data(dim, count);
    for (int i = 0; i < count; ++i) {
        const Pose3D p = options.normalize
                             ? normalize_pose(corpus.poses[static_cast<size_t>(i)],
                                              options.skeleton)
                             : corpus.poses[static_cast<size_t>(i)];
        data.col(i) = p.vectorized();
    }

    const Eigen::VectorXd mean = data.rowwise().mean();
    data.colwise() -= mean;
    const Eigen::MatrixXd covariance =
        data * data.transpose() / static_cast<double>(count - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
    if (eig.info() != Eigen::Success) {
        throw RankDeficient("fit_basis: eigendecomposition failed");
    }
    // Eigenvalues come back ascending; the leading components sit at the end.
    // The absolute floor keeps the numerical dust of an exactly-degenerate
    // corpus (identical poses) from counting as rank.
    const Eigen::VectorXd values = eig.eigenvalues();
    const double vmax = values[dim - 1];
    const double floor =
        std::max(vmax, 0.0) * 1e-10 + 1e-18 * (1.0 + mean.squaredNorm());
    int rank = 0;
    for (int i = 0; i < dim; ++i) {
        if (values[i] > floor) ++rank;
    }
    if (rank < basis_size) {
        throw RankDeficient("fit_basis: covariance rank " + std::to_string(rank) +
                            " < basis size " + std::to_string(basis_size));
    }

    std::vector<Eigen::Matrix3Xd> components;
    components.reserve(static_cast<size_t>(basis_size));
    Eigen::VectorXd sigmas(basis_size);
    for (int k = 0; k < basis_size; ++k) {
        const int idx = dim - 1 - k;
        Eigen::VectorXd v = eig.eigenvectors().col(idx);
        // Fix the arbitrary eigenvector sign: largest-magnitude entry positive.
        int imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0.0) v = -v;
        components.push_back(
            Eigen::Map<const Eigen::Matrix3Xd>(v.data(), 3, joints));
        sigmas[k] = std::sqrt(values[idx]);
    }
    return PoseBasis(Pose3D::from_vector(mean), std::move(components),
                     std::move(sigmas));
}

}  // namespace mvlift
