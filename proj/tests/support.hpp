// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures and independent oracles for the test suites. Everything
// here recomputes from public definitions rather than reusing the library's
// solver internals.
#pragma once

#include "mvlift/basis_fit.hpp"
#include "mvlift/detail/rng.hpp"
#include "mvlift/lifter_multi.hpp"
#include "mvlift/lifter_single.hpp"
#include "mvlift/synth_studio.hpp"

#include <Eigen/Dense>

namespace mvtest {

using namespace mvlift;

/// Random orthonormal basis with zero root rows over a given mean pose.
inline PoseBasis random_basis(const Pose3D& mean, int size, std::uint64_t seed,
                              double sigma0 = 0.3, double decay = 0.8) {
    const int joints = mean.joint_count();
    const int dim = 3 * joints;
    detail::Rng rng(seed);
    Eigen::MatrixXd raw(dim, size);
    for (int j = 0; j < size; ++j) {
        for (int i = 0; i < dim; ++i) raw(i, j) = rng.normal();
        raw.block<3, 1>(0, j).setZero();
    }
    // Gram-Schmidt keeps the zero root rows intact.
    for (int j = 0; j < size; ++j) {
        for (int k = 0; k < j; ++k) {
            raw.col(j) -= raw.col(k).dot(raw.col(j)) * raw.col(k);
        }
        raw.col(j).normalize();
    }
    std::vector<Eigen::Matrix3Xd> comps;
    Eigen::VectorXd sigmas(size);
    for (int j = 0; j < size; ++j) {
        comps.push_back(Eigen::Map<const Eigen::Matrix3Xd>(raw.col(j).data(), 3, joints));
        sigmas[j] = sigma0 * std::pow(decay, j);
    }
    return PoseBasis(mean, std::move(comps), std::move(sigmas));
}

/// The canonical rest pose normalized to unit mean bone length, root-centered.
inline Pose3D normalized_rest17() {
    return normalize_pose(rest_pose17(), skeleton17());
}

/// Small non-human pose for reduced instances: a bent chain of `joints`
/// points, root at the origin.
inline Pose3D chain_pose(int joints, std::uint64_t seed) {
    detail::Rng rng(seed);
    Eigen::Matrix3Xd j(3, joints);
    j.col(0).setZero();
    Eigen::Vector3d dir(0.3, 1.0, 0.15);
    dir.normalize();
    for (int p = 1; p < joints; ++p) {
        Eigen::Vector3d step(dir.x() + 0.4 * rng.normal(),
                             dir.y() + 0.4 * rng.normal(),
                             dir.z() + 0.4 * rng.normal());
        j.col(p) = j.col(p - 1) + step.normalized();
    }
    return Pose3D(std::move(j));
}

/// Scene around the default 4-camera right-angle rig with the built-in
/// basis; noise off unless configured by the caller.
inline SceneSpec default_scene(int basis_size = 8, std::uint64_t seed = 17) {
    SceneSpec spec;
    spec.subject.basis = builtin_basis(basis_size);
    spec.seed = seed;
    return spec;
}

// ------------------------------------------------------------- ambiguity rig

/// Basis engineered for a front/back depth ambiguity under a single
/// orthographic view: planar mean pose (z = 0), one planar component and one
/// pure-depth component. Mirroring depth then maps the span onto itself, so
/// (angle, coeffs) and (-angle, mirrored coeffs) explain one image equally
/// well up to the regularizer.
inline PoseBasis ambiguity_basis() {
    Pose3D rest = rest_pose17();
    rest.joints.row(2).setZero();
    const Pose3D mean = normalize_pose(rest, skeleton17());
    const int joints = mean.joint_count();
    detail::Rng rng(0xA3B1);

    Eigen::Matrix3Xd planar = Eigen::Matrix3Xd::Zero(3, joints);
    Eigen::Matrix3Xd depth = Eigen::Matrix3Xd::Zero(3, joints);
    for (int p = 1; p < joints; ++p) {
        planar(0, p) = rng.normal();
        planar(1, p) = rng.normal();
        depth(2, p) = rng.normal();
    }
    planar /= Eigen::Map<const Eigen::VectorXd>(planar.data(), planar.size()).norm();
    depth /= Eigen::Map<const Eigen::VectorXd>(depth.data(), depth.size()).norm();
    Eigen::VectorXd sigmas(2);
    sigmas << 0.3, 0.3;
    return PoseBasis(mean, {planar, depth}, sigmas);
}

struct StabilityResult {
    double argmin_max_jump = 0.0;
    double marginalize_max_jump = 0.0;
};

/// Single-view lift over a sequence that slides the depth coefficient
/// through zero (maximal rotation ambiguity mid-sequence) under light
/// detection noise. Returns the worst frame-to-frame jump of both modes.
inline StabilityResult run_stability_sequence(std::uint64_t seed, int steps = 15) {
    SceneSpec spec;
    spec.rig.camera_count = 1;
    spec.subject.basis = ambiguity_basis();
    spec.noise.sigma_px = 1.0;
    spec.seed = seed;
    const CameraRig rig = make_rig(spec.rig);

    const double theta = 20.0 * M_PI / 180.0;
    Eigen::VectorXd ca(2), cb(2);
    ca << 0.25, -0.35;
    cb << 0.25, 0.35;
    const Frame a = make_frame(spec, rig, ca, 1000.0, theta, Eigen::VectorXd(), 1);
    const Frame b = make_frame(spec, rig, cb, 1000.0, theta, Eigen::VectorXd(), 2);
    const auto frames = interpolate_sequence(spec, a, b, steps);

    const RotationGrid grid = RotationGrid::uniform(80);
    StabilityResult result;
    for (int pass = 0; pass < 2; ++pass) {
        LiftConfig config;
        config.rotation_mode = pass == 0 ? RotationMode::Argmin
                                         : RotationMode::Marginalize;
        double max_jump = 0.0;
        Pose3D previous;
        for (size_t f = 0; f < frames.size(); ++f) {
            const LiftResult lifted =
                lift_single(frames[f].corrupted[0].pose, rig.cameras[0],
                            spec.subject.basis, grid, config);
            if (f > 0) {
                const double jump =
                    (lifted.pose.joints - previous.joints).colwise().norm().mean();
                max_jump = std::max(max_jump, jump);
            }
            previous = lifted.pose;
        }
        (pass == 0 ? result.argmin_max_jump : result.marginalize_max_jump) = max_jump;
    }
    return result;
}

// ---------------------------------------------------------------- objective

/// The multi-view warp objective, recomputed from its definition.
/// epsilon <= 0 selects the quadratic (t^2/2) data term.
inline double warp_objective(const MultiViewProblem& pb, double angle,
                             double epsilon, double sigma_scale,
                             const Eigen::VectorXd& x) {
    const int joints = pb.basis.joint_count();
    const int bsize = pb.basis.size();
    const Eigen::Matrix3d rot = rotation_about_y(angle);
    double data = 0.0;
    for (size_t c = 0; c < pb.detections.size(); ++c) {
        const auto rows = pb.rig.cameras[c].rotation.topRows<2>();
        for (int p = 0; p < joints; ++p) {
            if (!pb.detections[c].visible(p)) continue;
            const Eigen::Vector2d r =
                pb.detections[c].joints.col(p) - rows * x.segment<3>(3 * p);
            for (int a = 0; a < 2; ++a) {
                data += epsilon > 0.0 ? huber_value(r[a], epsilon)
                                      : 0.5 * r[a] * r[a];
            }
        }
    }
    Eigen::VectorXd model = x.head(3 * joints);
    model -= x[3 * joints] * Pose3D(rot * pb.basis.mean.joints).vectorized();
    for (int i = 0; i < bsize; ++i) {
        model -= x[3 * joints + 1 + i] *
                 Pose3D(rot * pb.basis.components[static_cast<size_t>(i)]).vectorized();
    }
    double reg = 0.0;
    for (int i = 0; i < bsize; ++i) {
        const double se = pb.basis.sigmas[i] / sigma_scale;
        const double c = x[3 * joints + 1 + i];
        reg += se * se * c * c;
    }
    return pb.config.lambda * data + model.squaredNorm() + reg;
}

inline Eigen::VectorXd warp_objective_grad(const MultiViewProblem& pb, double angle,
                                           double epsilon, double sigma_scale,
                                           const Eigen::VectorXd& x) {
    const int joints = pb.basis.joint_count();
    const int bsize = pb.basis.size();
    const Eigen::Matrix3d rot = rotation_about_y(angle);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(x.size());
    for (size_t c = 0; c < pb.detections.size(); ++c) {
        const auto rows = pb.rig.cameras[c].rotation.topRows<2>();
        for (int p = 0; p < joints; ++p) {
            if (!pb.detections[c].visible(p)) continue;
            const Eigen::Vector2d r =
                pb.detections[c].joints.col(p) - rows * x.segment<3>(3 * p);
            for (int a = 0; a < 2; ++a) {
                double dphi = r[a];  // quadratic branch
                if (epsilon > 0.0 && std::abs(r[a]) > epsilon) {
                    dphi = r[a] > 0 ? epsilon : -epsilon;
                }
                grad.segment<3>(3 * p) -=
                    pb.config.lambda * dphi * rows.row(a).transpose();
            }
        }
    }
    const Eigen::VectorXd mean_vec = Pose3D(rot * pb.basis.mean.joints).vectorized();
    Eigen::MatrixXd comps(3 * joints, bsize);
    for (int i = 0; i < bsize; ++i) {
        comps.col(i) =
            Pose3D(rot * pb.basis.components[static_cast<size_t>(i)]).vectorized();
    }
    const Eigen::VectorXd model = x.head(3 * joints) - x[3 * joints] * mean_vec -
                                  comps * x.tail(bsize);
    grad.head(3 * joints) += 2.0 * model;
    grad[3 * joints] -= 2.0 * mean_vec.dot(model);
    grad.tail(bsize) -= 2.0 * comps.transpose() * model;
    for (int i = 0; i < bsize; ++i) {
        const double se = pb.basis.sigmas[i] / sigma_scale;
        grad[3 * joints + 1 + i] += 2.0 * se * se * x[3 * joints + 1 + i];
    }
    return grad;
}

/// First-order oracle: diagonally preconditioned gradient descent with
/// Armijo backtracking from the origin. Returns the reached objective.
inline double descend_objective(const MultiViewProblem& pb, double angle,
                                double epsilon, double sigma_scale,
                                int max_iters = 200000) {
    const int joints = pb.basis.joint_count();
    const int bsize = pb.basis.size();
    const int n = 3 * joints + 1 + bsize;

    // Rough diagonal of the quadratic-mode Hessian as a preconditioner.
    Eigen::VectorXd precond = Eigen::VectorXd::Constant(n, 2.0);
    for (size_t c = 0; c < pb.detections.size(); ++c) {
        const auto rows = pb.rig.cameras[c].rotation.topRows<2>();
        for (int p = 0; p < joints; ++p) {
            if (!pb.detections[c].visible(p)) continue;
            for (int a = 0; a < 3; ++a) {
                precond[3 * p + a] +=
                    pb.config.lambda * rows.col(a).squaredNorm();
            }
        }
    }
    precond[3 * joints] =
        2.0 * Pose3D(pb.basis.mean.joints).vectorized().squaredNorm();
    for (int i = 0; i < bsize; ++i) {
        const double se = pb.basis.sigmas[i] / sigma_scale;
        precond[3 * joints + 1 + i] = 2.0 * (1.0 + se * se);
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    double f = warp_objective(pb, angle, epsilon, sigma_scale, x);
    double step = 1.0;
    for (int it = 0; it < max_iters; ++it) {
        const Eigen::VectorXd g = warp_objective_grad(pb, angle, epsilon, sigma_scale, x);
        const Eigen::VectorXd dir = (g.array() / precond.array()).matrix();
        const double slope = g.dot(dir);
        if (slope <= 1e-18 * (1.0 + std::abs(f))) break;
        double t = step;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Eigen::VectorXd trial = x - t * dir;
            const double ft = warp_objective(pb, angle, epsilon, sigma_scale, trial);
            if (ft <= f - 0.3 * t * slope) {
                x = trial;
                if (std::abs(f - ft) <= 1e-16 * (1.0 + std::abs(f)) && it > 100) {
                    return ft;
                }
                f = ft;
                moved = true;
                step = std::min(t * 1.5, 4.0);
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }
    return f;
}

}  // namespace mvtest
