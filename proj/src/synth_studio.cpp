// SPDX-License-Identifier: Apache-2.0
#include "mvlift/synth_studio.hpp"

#include "mvlift/detail/rng.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace mvlift {

namespace {

double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * M_PI);
    if (a < 0.0) a += 2.0 * M_PI;
    return a;
}

Eigen::VectorXd sample_off_span(const PoseBasis& basis, double magnitude,
                                detail::Rng& rng) {
    const int dim = 3 * basis.joint_count();
    if (!(magnitude > 0.0)) return Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd g(dim);
    for (int i = 0; i < dim; ++i) g[i] = rng.normal();
    g.segment<3>(0).setZero();  // keep the root pinned
    for (const auto& comp : basis.components) {
        const Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(comp.data(), dim);
        g -= g.dot(e) / e.squaredNorm() * e;
    }
    const double norm = g.norm();
    if (norm < 1e-12) return Eigen::VectorXd::Zero(dim);
    return magnitude / norm * g;
}

}  // namespace

void SceneSpec::validate() const {
    auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (rig.camera_count < 1) throw InvalidArgument("SceneSpec: camera_count < 1");
    if (!(rig.distance_mm > 0.0)) throw InvalidArgument("SceneSpec: distance <= 0");
    if (!rate_ok(noise.outlier_rate) || !rate_ok(noise.missing_rate)) {
        throw InvalidArgument("SceneSpec: rates must lie in [0,1]");
    }
    if (noise.sigma_px < 0.0) throw InvalidArgument("SceneSpec: sigma_px < 0");
    if (noise.outlier_min_px < 0.0 || noise.outlier_max_px < noise.outlier_min_px) {
        throw InvalidArgument("SceneSpec: bad outlier displacement range");
    }
    if (subject.scale_max < subject.scale_min || !(subject.scale_min > 0.0)) {
        throw InvalidArgument("SceneSpec: bad scale range");
    }
    if (subject.off_span < 0.0) throw InvalidArgument("SceneSpec: off_span < 0");
    if (subject.basis.size() < 1) throw InvalidArgument("SceneSpec: missing basis");
}

CameraRig make_rig(const RigSpec& spec) {
    std::vector<Camera> cams;
    const int count = spec.yaws.empty() ? spec.camera_count
                                        : static_cast<int>(spec.yaws.size());
    cams.reserve(static_cast<size_t>(count));
    for (int c = 0; c < count; ++c) {
        const double yaw = spec.yaws.empty()
                               ? spec.yaw_start + 2.0 * M_PI * c / count
                               : spec.yaws[static_cast<size_t>(c)];
        cams.push_back(Camera::yaw_facing(yaw, spec.distance_mm,
                                          "cam" + std::to_string(c)));
    }
    return CameraRig(std::move(cams));
}

Frame make_frame(const SceneSpec& spec, const CameraRig& rig,
                 const Eigen::VectorXd& coeffs, double scale, double angle,
                 const Eigen::VectorXd& off_span, std::uint64_t noise_salt) {
    const PoseBasis& basis = spec.subject.basis;
    const int joints = basis.joint_count();

    Frame frame;
    frame.gt_coeffs = coeffs;
    frame.gt_scale = scale;
    frame.gt_angle = angle;
    frame.off_span = off_span;

    Eigen::VectorXd model = basis.model_pose(coeffs).vectorized();
    if (off_span.size() == model.size()) model += off_span;
    Eigen::Matrix3Xd shape = Eigen::Map<const Eigen::Matrix3Xd>(model.data(), 3, joints);
    // The studio convention keeps the root at the origin so that clean
    // projections are root-anchored. Fitted bases are already centered;
    // this is exact for them and a no-op.
    shape.colwise() -= Eigen::Vector3d(shape.col(0));
    frame.gt_pose = Pose3D(scale * (rotation_about_y(angle) * shape));

    detail::Rng scene_rng(spec.seed);
    for (int c = 0; c < rig.camera_count(); ++c) {
        const Camera& cam = rig.cameras[static_cast<size_t>(c)];
        Pose2D clean = project_pose(cam, frame.gt_pose, 1.0);

        detail::Rng rng = scene_rng.fork(noise_salt).fork(static_cast<std::uint64_t>(c));
        Eigen::Matrix2Xd noisy = clean.joints;
        std::vector<std::uint8_t> vis(static_cast<size_t>(joints), 1);
        for (int p = 0; p < joints; ++p) {
            if (spec.noise.missing_rate > 0.0 &&
                rng.uniform() < spec.noise.missing_rate) {
                vis[static_cast<size_t>(p)] = 0;
                frame.ledger.push_back({c, p, JointCorruption::Kind::Missing});
                continue;
            }
            if (spec.noise.sigma_px > 0.0) {
                noisy(0, p) += spec.noise.sigma_px * rng.normal();
                noisy(1, p) += spec.noise.sigma_px * rng.normal();
            }
            if (spec.noise.outlier_rate > 0.0 &&
                rng.uniform() < spec.noise.outlier_rate) {
                const double dir = rng.uniform(0.0, 2.0 * M_PI);
                const double mag =
                    rng.uniform(spec.noise.outlier_min_px, spec.noise.outlier_max_px);
                noisy(0, p) += mag * std::cos(dir);
                noisy(1, p) += mag * std::sin(dir);
                frame.ledger.push_back({c, p, JointCorruption::Kind::Outlier});
            }
        }
        Detections2D det;
        det.pose = Pose2D(std::move(noisy), std::move(vis));
        frame.corrupted.push_back(std::move(det));
        frame.clean.push_back(std::move(clean));
    }
    return frame;
}

std::vector<Frame> generate(const SceneSpec& spec, int n_frames) {
    spec.validate();
    if (n_frames < 0) throw InvalidArgument("generate: negative frame count");
    const CameraRig rig = make_rig(spec.rig);
    const PoseBasis& basis = spec.subject.basis;

    std::vector<Frame> frames;
    frames.reserve(static_cast<size_t>(n_frames));
    detail::Rng scene_rng(spec.seed);
    for (int f = 0; f < n_frames; ++f) {
        detail::Rng rng = scene_rng.fork(static_cast<std::uint64_t>(f));
        Eigen::VectorXd coeffs(basis.size());
        for (int i = 0; i < basis.size(); ++i) {
            coeffs[i] = rng.normal() * basis.sigmas[i] * spec.subject.coeff_scale;
        }
        const double scale = rng.uniform(spec.subject.scale_min, spec.subject.scale_max);
        const double angle =
            wrap_angle(rng.uniform(spec.subject.yaw_min, spec.subject.yaw_max));
        const Eigen::VectorXd off =
            sample_off_span(basis, spec.subject.off_span, rng);
        frames.push_back(make_frame(spec, rig, coeffs, scale, angle, off,
                                    0x400000ull + static_cast<std::uint64_t>(f)));
    }
    return frames;
}

std::vector<Frame> interpolate_sequence(const SceneSpec& spec, const Frame& a,
                                        const Frame& b, int steps) {
    spec.validate();
    if (steps < 2) throw InvalidArgument("interpolate_sequence: steps < 2");
    const CameraRig rig = make_rig(spec.rig);

    double delta = std::remainder(b.gt_angle - a.gt_angle, 2.0 * M_PI);
    std::vector<Frame> out;
    out.reserve(static_cast<size_t>(steps));
    for (int k = 0; k < steps; ++k) {
        if (k == 0) {
            out.push_back(a);
            continue;
        }
        if (k == steps - 1) {
            out.push_back(b);
            continue;
        }
        const double t = static_cast<double>(k) / (steps - 1);
        const Eigen::VectorXd coeffs = (1.0 - t) * a.gt_coeffs + t * b.gt_coeffs;
        const double scale = (1.0 - t) * a.gt_scale + t * b.gt_scale;
        const double angle = wrap_angle(a.gt_angle + t * delta);
        Eigen::VectorXd off;
        if (a.off_span.size() == b.off_span.size() && a.off_span.size() > 0) {
            off = (1.0 - t) * a.off_span + t * b.off_span;
        }
        out.push_back(make_frame(spec, rig, coeffs, scale, angle, off,
                                 0x17E4Full + static_cast<std::uint64_t>(k)));
    }
    return out;
}

namespace {

// Rotates `members` of the pose about `pivot` around a world axis.
void rotate_subtree(Eigen::Matrix3Xd& joints, int pivot,
                    const Eigen::Vector3d& axis, double angle,
                    std::initializer_list<int> members) {
    const Eigen::Matrix3d rot =
        Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
    const Eigen::Vector3d center = joints.col(pivot);
    for (int p : members) {
        joints.col(p) = center + rot * (joints.col(p) - center).eval();
    }
}

}  // namespace

PoseCorpus sample_motion_corpus(int count, std::uint64_t seed) {
    if (count < 1) throw InvalidArgument("sample_motion_corpus: count < 1");
    const Pose3D rest = rest_pose17();
    std::vector<Pose3D> poses;
    poses.reserve(static_cast<size_t>(count));
    detail::Rng base(seed);
    const Eigen::Vector3d x_axis(1, 0, 0);
    const Eigen::Vector3d y_axis(0, 1, 0);
    const Eigen::Vector3d z_axis(0, 0, 1);
    for (int i = 0; i < count; ++i) {
        detail::Rng rng = base.fork(static_cast<std::uint64_t>(i));
        Eigen::Matrix3Xd j = rest.joints;
        // Torso lean and twist.
        rotate_subtree(j, 0, x_axis, 0.15 * rng.normal(),
                       {7, 8, 9, 10, 11, 12, 13, 14, 15, 16});
        rotate_subtree(j, 0, y_axis, 0.2 * rng.normal(),
                       {7, 8, 9, 10, 11, 12, 13, 14, 15, 16});
        // Arms: swing at the shoulder, bend at the elbow.
        rotate_subtree(j, 11, x_axis, 0.5 * rng.normal(), {12, 13});
        rotate_subtree(j, 11, z_axis, 0.3 * rng.normal(), {12, 13});
        rotate_subtree(j, 12, x_axis, 0.4 * rng.normal(), {13});
        rotate_subtree(j, 14, x_axis, 0.5 * rng.normal(), {15, 16});
        rotate_subtree(j, 14, z_axis, 0.3 * rng.normal(), {15, 16});
        rotate_subtree(j, 15, x_axis, 0.4 * rng.normal(), {16});
        // Legs: swing at the hip, bend at the knee.
        rotate_subtree(j, 1, x_axis, 0.35 * rng.normal(), {2, 3});
        rotate_subtree(j, 2, x_axis, 0.3 * rng.normal(), {3});
        rotate_subtree(j, 4, x_axis, 0.35 * rng.normal(), {5, 6});
        rotate_subtree(j, 5, x_axis, 0.3 * rng.normal(), {6});
        // Head nod.
        rotate_subtree(j, 8, x_axis, 0.2 * rng.normal(), {9, 10});
        // Small isotropic jitter so the corpus has full rank.
        for (int p = 1; p < j.cols(); ++p) {
            for (int axis = 0; axis < 3; ++axis) {
                j(axis, p) += 4.0 * rng.normal();
            }
        }
        poses.emplace_back(std::move(j));
    }
    return PoseCorpus(std::move(poses));
}

PoseBasis builtin_basis(int basis_size) {
    const PoseCorpus corpus = sample_motion_corpus(256, 0x5EEDBA5E);
    return fit_basis(corpus, basis_size);
}

}  // namespace mvlift
