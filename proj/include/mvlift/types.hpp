// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvlift {

// Conventions used throughout the library:
//   * World frame is y-up; the ground plane is x-z. Subject rotations are
//     rotations about the world y-axis.
//   * 3D poses are root-centered (joint 0 = pelvis at the origin) in
//     millimetres. 2D detections are in pixels, anchored so that the clean
//     projection of the root lands at (0, 0) (crop coordinates).
//   * The camera model is scaled orthographic: project with the camera
//     rotation, drop depth, multiply by one per-frame scale shared by all
//     cameras.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error { using Error::Error; };
struct NonOrthonormalRotation : Error { using Error::Error; };
struct DuplicateLabel : Error { using Error::Error; };
struct DegeneratePose : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct DegenerateSystem : Error { using Error::Error; };
struct AllRotationsDegenerate : Error { using Error::Error; };
struct JointCountMismatch : Error { using Error::Error; };
struct DegenerateAlignment : Error { using Error::Error; };
struct DegenerateExtents : Error { using Error::Error; };
struct OutOfBounds : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct VersionMismatch : Error { using Error::Error; };
struct JointOrderUnknown : Error { using Error::Error; };

constexpr int kDefaultJointCount = 17;

/// A 3D pose: one 3-vector per joint, world units (mm).
struct Pose3D {
    Eigen::Matrix3Xd joints;

    Pose3D() = default;
    explicit Pose3D(Eigen::Matrix3Xd j);

    int joint_count() const { return static_cast<int>(joints.cols()); }
    static Pose3D zero(int joint_count);

    /// Vectorized view, column-major: (x0,y0,z0, x1,y1,z1, ...).
    Eigen::VectorXd vectorized() const;
    static Pose3D from_vector(const Eigen::VectorXd& v);
};

/// A 2D pose in one view; `visibility` empty means every joint is visible.
struct Pose2D {
    Eigen::Matrix2Xd joints;
    std::vector<std::uint8_t> visibility;

    Pose2D() = default;
    explicit Pose2D(Eigen::Matrix2Xd j, std::vector<std::uint8_t> vis = {});

    int joint_count() const { return static_cast<int>(joints.cols()); }
    bool visible(int p) const {
        return visibility.empty() || visibility[static_cast<size_t>(p)] != 0;
    }
    int visible_count() const;
};

/// 2D joint detections with per-joint confidences in [0,1].
/// `confidence` empty means all ones.
struct Detections2D {
    Pose2D pose;
    Eigen::VectorXd confidence;

    double confidence_of(int p) const {
        return confidence.size() == 0 ? 1.0 : confidence[p];
    }
};

double rotation_orthonormality_error(const Eigen::Matrix3d& r);

/// Extrinsic camera: world -> camera rotation plus translation.
/// Only the rotation participates in orthographic projection; translation is
/// kept for calibration-file fidelity.
struct Camera {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    std::string label;

    Camera() = default;
    Camera(const Eigen::Matrix3d& r, const Eigen::Vector3d& t, std::string lbl);

    /// Camera on the ground-plane circle at `yaw` (radians), `distance` mm
    /// from the origin, looking at the origin. Image x is the camera's right,
    /// image y points down.
    static Camera yaw_facing(double yaw, double distance, std::string lbl);
};

struct CameraRig {
    std::vector<Camera> cameras;

    CameraRig() = default;
    explicit CameraRig(std::vector<Camera> cams);

    int camera_count() const { return static_cast<int>(cameras.size()); }
};

/// Re-checks every camera invariant (orthonormal, det +1, unique labels).
/// Throws NonOrthonormalRotation or DuplicateLabel.
void validate_rig(const CameraRig& rig);

Eigen::Matrix3d rotation_about_y(double angle);

/// Orthographic projection of one world point through a camera (no scale).
Eigen::Vector2d project_point(const Camera& camera, const Eigen::Vector3d& x);

/// scale * Pi * E * pose for every joint.
Pose2D project_pose(const Camera& camera, const Pose3D& pose, double scale);

/// Crude data-units-per-model-unit estimate: RMS detection radius over RMS
/// mean-pose radius, corrected for average orthographic foreshortening.
/// Used to express the coefficient penalty in data units; falls back to 1
/// when the inputs are degenerate.
double estimate_projection_scale(const std::vector<Pose2D>& views,
                                 const Pose3D& mean_pose);

/// PPCA pose model: mean pose, orthonormal components, per-component
/// standard deviations in decreasing order.
struct PoseBasis {
    Pose3D mean;
    std::vector<Eigen::Matrix3Xd> components;
    Eigen::VectorXd sigmas;

    PoseBasis() = default;
    PoseBasis(Pose3D mean_pose, std::vector<Eigen::Matrix3Xd> comps,
              Eigen::VectorXd sigma_values);

    int size() const { return static_cast<int>(components.size()); }
    int joint_count() const { return mean.joint_count(); }

    /// mean + sum_i coeffs[i] * components[i]
    Pose3D model_pose(const Eigen::VectorXd& coeffs) const;
    /// Least-squares coefficients of a (normalized) pose against the basis.
    Eigen::VectorXd project(const Pose3D& pose) const;
    Pose3D reconstruct(const Eigen::VectorXd& coeffs) const { return model_pose(coeffs); }
};

/// Uniform grid of ground-plane angles on [0, 2*pi).
struct RotationGrid {
    Eigen::VectorXd angles;

    RotationGrid() = default;
    explicit RotationGrid(Eigen::VectorXd a);

    static RotationGrid uniform(int count);
    int size() const { return static_cast<int>(angles.size()); }
};

enum class RobustMode { Frobenius, Huber };
enum class RotationMode { Argmin, Marginalize };
enum class EpsilonMode { Adaptive, Fixed };
enum class RhoMode { Adaptive, Fixed };

/// Solver configuration. Defaults reproduce the headline pipeline:
/// Huber data term, marginalized rotations, 5 IRLS iterations, 80 angles.
struct LiftConfig {
    /// Huber knee in input units; used verbatim in Fixed mode. In Adaptive
    /// mode the knee is re-estimated per solve from the residuals of an
    /// initial non-robust pass (1.4826 * MAD).
    double huber_epsilon = 1.0;
    EpsilonMode epsilon_mode = EpsilonMode::Adaptive;

    /// Data-term weight of the multi-view objective.
    double lambda = 1.0;

    /// Marginalization temperature. In Adaptive mode the effective value is
    /// rho / (median cost - min cost) over the rotation grid, which makes
    /// the softmax weights invariant to both shifting and scaling the costs.
    /// The default is sharp enough that clearly-worse rotations get no
    /// weight while genuinely near-tied rotations still average.
    double rho = 3.0e4;
    RhoMode rho_mode = RhoMode::Adaptive;

    int irls_iterations = 5;
    int rotation_count = 80;
    RobustMode robust_mode = RobustMode::Huber;
    RotationMode rotation_mode = RotationMode::Marginalize;

    /// Penalize the raw coefficients a = c/s (via alternating minimization)
    /// instead of the combined unknowns c = s*a. Off by default: the
    /// combined form keeps the per-rotation problem a single linear solve.
    bool exact_coefficient_penalty = false;

    void validate() const;
};

/// Joint names plus bone topology; joint 0 is the root. Hip indices of -1
/// disable yaw alignment for skeletons that have no usable hip axis.
struct Skeleton {
    std::vector<std::string> joint_names;
    std::vector<std::array<int, 2>> bones;
    int root = 0;
    int left_hip = -1;
    int right_hip = -1;

    int joint_count() const { return static_cast<int>(joint_names.size()); }
    /// Index of a joint name, -1 when absent.
    int index_of(const std::string& name) const;
};

/// The canonical 17-joint skeleton. Order:
///   0 pelvis, 1 hip_r, 2 knee_r, 3 ankle_r, 4 hip_l, 5 knee_l, 6 ankle_l,
///   7 spine, 8 neck, 9 nose, 10 head, 11 shoulder_l, 12 elbow_l,
///   13 wrist_l, 14 shoulder_r, 15 elbow_r, 16 wrist_r
const Skeleton& skeleton17();

/// 14-joint evaluation subset: skeleton17 minus pelvis, spine and neck.
const std::vector<int>& subset14();

/// A plausible standing rest pose on the canonical skeleton, millimetres,
/// root-centered, hip axis exactly along +x.
Pose3D rest_pose17();

}  // namespace mvlift
