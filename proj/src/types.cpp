// SPDX-License-Identifier: Apache-2.0
#include "mvlift/types.hpp"

#include <cmath>
#include <unordered_set>

namespace mvlift {

namespace {

constexpr double kOrthonormalTol = 1e-9;

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
    if (!m.allFinite()) {
        throw InvalidArgument(std::string(what) + ": non-finite value");
    }
}

}  // namespace

Pose3D::Pose3D(Eigen::Matrix3Xd j) : joints(std::move(j)) {
    require_finite(joints, "Pose3D");
}

Pose3D Pose3D::zero(int joint_count) {
    return Pose3D(Eigen::Matrix3Xd::Zero(3, joint_count));
}

Eigen::VectorXd Pose3D::vectorized() const {
    return Eigen::Map<const Eigen::VectorXd>(joints.data(), joints.size());
}

Pose3D Pose3D::from_vector(const Eigen::VectorXd& v) {
    if (v.size() % 3 != 0) {
        throw InvalidArgument("Pose3D::from_vector: length not divisible by 3");
    }
    Eigen::Matrix3Xd j = Eigen::Map<const Eigen::Matrix3Xd>(v.data(), 3, v.size() / 3);
    return Pose3D(std::move(j));
}

Pose2D::Pose2D(Eigen::Matrix2Xd j, std::vector<std::uint8_t> vis)
    : joints(std::move(j)), visibility(std::move(vis)) {
    if (!visibility.empty() &&
        visibility.size() != static_cast<size_t>(joints.cols())) {
        throw InvalidArgument("Pose2D: visibility size mismatch");
    }
    for (int p = 0; p < joint_count(); ++p) {
        if (visible(p) && !joints.col(p).allFinite()) {
            throw InvalidArgument("Pose2D: non-finite visible joint");
        }
    }
}

int Pose2D::visible_count() const {
    if (visibility.empty()) return joint_count();
    int n = 0;
    for (auto v : visibility) n += (v != 0);
    return n;
}

double rotation_orthonormality_error(const Eigen::Matrix3d& r) {
    return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

Camera::Camera(const Eigen::Matrix3d& r, const Eigen::Vector3d& t, std::string lbl)
    : rotation(r), translation(t), label(std::move(lbl)) {
    require_finite(rotation, "Camera rotation");
    require_finite(translation, "Camera translation");
    const double dev = rotation_orthonormality_error(rotation);
    if (dev > kOrthonormalTol) {
        throw NonOrthonormalRotation("camera '" + label + "': |R^T R - I| = " +
                                     std::to_string(dev));
    }
    if (rotation.determinant() < 0.0) {
        throw NonOrthonormalRotation("camera '" + label + "': det(R) < 0");
    }
}

Camera Camera::yaw_facing(double yaw, double distance, std::string lbl) {
    // Frame at yaw 0: position (0,0,+d) looking towards -z, image x = world x,
    // image y = world -y (pixel rows grow downwards).
    Eigen::Matrix3d base;
    base << 1, 0, 0,
            0, -1, 0,
            0, 0, -1;
    const Eigen::Matrix3d r = base * rotation_about_y(-yaw);
    const Eigen::Vector3d position =
        distance * Eigen::Vector3d(std::sin(yaw), 0.0, std::cos(yaw));
    return Camera(r, -r * position, std::move(lbl));
}

CameraRig::CameraRig(std::vector<Camera> cams) : cameras(std::move(cams)) {
    validate_rig(*this);
}

void validate_rig(const CameraRig& rig) {
    if (rig.cameras.empty()) {
        throw InvalidArgument("CameraRig: needs at least one camera");
    }
    std::unordered_set<std::string> labels;
    for (const Camera& cam : rig.cameras) {
        const double dev = rotation_orthonormality_error(cam.rotation);
        if (dev > kOrthonormalTol || cam.rotation.determinant() < 0.0) {
            throw NonOrthonormalRotation("camera '" + cam.label + "': |R^T R - I| = " +
                                         std::to_string(dev));
        }
        if (!labels.insert(cam.label).second) {
            throw DuplicateLabel("duplicate camera label '" + cam.label + "'");
        }
    }
}

Eigen::Matrix3d rotation_about_y(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Eigen::Matrix3d r;
    r << c, 0, s,
         0, 1, 0,
        -s, 0, c;
    return r;
}

Eigen::Vector2d project_point(const Camera& camera, const Eigen::Vector3d& x) {
    return (camera.rotation * x).head<2>();
}

Pose2D project_pose(const Camera& camera, const Pose3D& pose, double scale) {
    Eigen::Matrix2Xd out = scale * (camera.rotation * pose.joints).topRows<2>();
    return Pose2D(std::move(out));
}

double estimate_projection_scale(const std::vector<Pose2D>& views,
                                 const Pose3D& mean_pose) {
    // E|Pi R v|^2 = (2/3)|v|^2 under random rotation, hence the correction.
    double num = 0.0;
    double den = 0.0;
    int count = 0;
    for (const Pose2D& view : views) {
        for (int p = 0; p < view.joint_count(); ++p) {
            if (!view.visible(p) || p >= mean_pose.joint_count()) continue;
            num += view.joints.col(p).squaredNorm();
            den += (2.0 / 3.0) * mean_pose.joints.col(p).squaredNorm();
            ++count;
        }
    }
    if (count == 0 || !(den > 0.0) || !(num > 0.0)) return 1.0;
    return std::sqrt(num / den);
}

PoseBasis::PoseBasis(Pose3D mean_pose, std::vector<Eigen::Matrix3Xd> comps,
                     Eigen::VectorXd sigma_values)
    : mean(std::move(mean_pose)),
      components(std::move(comps)),
      sigmas(std::move(sigma_values)) {
    if (components.empty()) {
        throw InvalidArgument("PoseBasis: needs at least one component");
    }
    if (sigmas.size() != static_cast<Eigen::Index>(components.size())) {
        throw InvalidArgument("PoseBasis: sigma count != component count");
    }
    for (const auto& c : components) {
        if (c.cols() != mean.joints.cols()) {
            throw JointCountMismatch("PoseBasis: component joint count mismatch");
        }
        require_finite(c, "PoseBasis component");
    }
    for (Eigen::Index i = 0; i < sigmas.size(); ++i) {
        if (!(sigmas[i] > 0.0) || !std::isfinite(sigmas[i])) {
            throw InvalidArgument("PoseBasis: sigmas must be positive finite");
        }
    }
}

Pose3D PoseBasis::model_pose(const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() != size()) {
        throw InvalidArgument("PoseBasis::model_pose: coefficient count mismatch");
    }
    Eigen::Matrix3Xd out = mean.joints;
    for (int i = 0; i < size(); ++i) {
        out += coeffs[i] * components[i];
    }
    return Pose3D(std::move(out));
}

Eigen::VectorXd PoseBasis::project(const Pose3D& pose) const {
    if (pose.joint_count() != joint_count()) {
        throw JointCountMismatch("PoseBasis::project: joint count mismatch");
    }
    const Eigen::Matrix3Xd centered = pose.joints - mean.joints;
    Eigen::VectorXd coeffs(size());
    for (int i = 0; i < size(); ++i) {
        coeffs[i] = (centered.array() * components[i].array()).sum();
    }
    return coeffs;
}

RotationGrid::RotationGrid(Eigen::VectorXd a) : angles(std::move(a)) {
    if (angles.size() < 1) {
        throw InvalidArgument("RotationGrid: empty");
    }
    const int n = static_cast<int>(angles.size());
    const double step = 2.0 * M_PI / n;
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(angles[i])) {
            throw InvalidArgument("RotationGrid: non-finite angle");
        }
        if (i > 0 && !(angles[i] > angles[i - 1])) {
            throw InvalidArgument("RotationGrid: angles must be strictly increasing");
        }
        if (std::abs(angles[i] - (angles[0] + i * step)) > 1e-9) {
            throw InvalidArgument("RotationGrid: angles must be uniformly spaced");
        }
    }
    if (angles[0] < 0.0 || angles[n - 1] >= 2.0 * M_PI) {
        throw InvalidArgument("RotationGrid: angles must lie in [0, 2*pi)");
    }
}

RotationGrid RotationGrid::uniform(int count) {
    if (count < 1) {
        throw InvalidArgument("RotationGrid::uniform: count must be positive");
    }
    Eigen::VectorXd a(count);
    for (int i = 0; i < count; ++i) {
        a[i] = 2.0 * M_PI * i / count;
    }
    return RotationGrid(std::move(a));
}

void LiftConfig::validate() const {
    if (!(huber_epsilon > 0.0)) throw InvalidArgument("LiftConfig: huber_epsilon <= 0");
    if (!(lambda > 0.0)) throw InvalidArgument("LiftConfig: lambda <= 0");
    if (!(rho > 0.0)) throw InvalidArgument("LiftConfig: rho <= 0");
    if (irls_iterations < 1) throw InvalidArgument("LiftConfig: irls_iterations < 1");
    if (rotation_count < 1) throw InvalidArgument("LiftConfig: rotation_count < 1");
}

int Skeleton::index_of(const std::string& name) const {
    for (int i = 0; i < joint_count(); ++i) {
        if (joint_names[static_cast<size_t>(i)] == name) return i;
    }
    return -1;
}

const Skeleton& skeleton17() {
    static const Skeleton skel = [] {
        Skeleton s;
        s.joint_names = {"pelvis",    "hip_r",      "knee_r",  "ankle_r", "hip_l",
                         "knee_l",    "ankle_l",    "spine",   "neck",    "nose",
                         "head",      "shoulder_l", "elbow_l", "wrist_l",
                         "shoulder_r", "elbow_r",   "wrist_r"};
        s.bones = {{0, 1},  {1, 2},   {2, 3},  {0, 4},  {4, 5},   {5, 6},
                   {0, 7},  {7, 8},   {8, 9},  {9, 10}, {8, 11},  {11, 12},
                   {12, 13}, {8, 14}, {14, 15}, {15, 16}};
        s.root = 0;
        s.left_hip = 4;
        s.right_hip = 1;
        return s;
    }();
    return skel;
}

const std::vector<int>& subset14() {
    static const std::vector<int> subset = {1, 2, 3,  4,  5,  6,  9,
                                            10, 11, 12, 13, 14, 15, 16};
    return subset;
}

Pose3D rest_pose17() {
    Eigen::Matrix3Xd j(3, 17);
    // x = hip axis (left positive), y = up, z = facing direction.
    j.col(0) << 0, 0, 0;          // pelvis
    j.col(1) << -130, -60, 0;     // hip_r
    j.col(2) << -140, -500, 0;    // knee_r
    j.col(3) << -150, -940, 20;   // ankle_r
    j.col(4) << 130, -60, 0;      // hip_l
    j.col(5) << 140, -500, 0;     // knee_l
    j.col(6) << 150, -940, 20;    // ankle_l
    j.col(7) << 0, 250, 10;       // spine
    j.col(8) << 0, 500, 0;        // neck
    j.col(9) << 0, 590, 95;       // nose
    j.col(10) << 0, 690, 30;      // head
    j.col(11) << 185, 455, 0;     // shoulder_l
    j.col(12) << 320, 240, 30;    // elbow_l
    j.col(13) << 400, 30, 60;     // wrist_l
    j.col(14) << -185, 455, 0;    // shoulder_r
    j.col(15) << -320, 240, 30;   // elbow_r
    j.col(16) << -400, 30, 60;    // wrist_r
    // Hip axis (col 4 - col 1) is exactly +x by construction.
    return Pose3D(std::move(j));
}

}  // namespace mvlift
