// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "support.hpp"

#include "mvlift/lifter_single.hpp"

using namespace mvlift;

namespace {

const Camera kCamera = Camera::yaw_facing(0.3, 4000.0, "cam");

Pose2D project_model(const PoseBasis& basis, const Eigen::VectorXd& coeffs,
                     double scale, double angle, const Camera& camera) {
    const Pose3D model = basis.model_pose(coeffs);
    return project_pose(camera,
                        Pose3D(scale * (rotation_about_y(angle) * model.joints)),
                        1.0);
}

}  // namespace

TEST_CASE("rest shape at unit scale is recovered exactly") {
    const PoseBasis basis = builtin_basis(6);
    const Pose2D detections =
        project_model(basis, Eigen::VectorXd::Zero(6), 1.0, 0.0, kCamera);
    const RotationSolution sol = solve_rotation(detections, kCamera, basis, 0.0);
    REQUIRE(sol.valid);
    CHECK(sol.scale == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.coefficients.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(sol.cost < 1e-15);
    // The stored pose is the recomputable model pose.
    const Pose3D expect(sol.scale * (rotation_about_y(0.0) *
                                     basis.model_pose(sol.coefficients).joints));
    CHECK((sol.pose.joints - expect.joints).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("with a vanishing regularizer the projection is reproduced") {
    // sigma -> 0 limit: build the same basis with tiny sigmas.
    const PoseBasis base = builtin_basis(6);
    const PoseBasis tiny(base.mean, base.components,
                         Eigen::VectorXd::Constant(6, 1e-9));
    detail::Rng rng(5);
    Eigen::VectorXd coeffs(6);
    for (int i = 0; i < 6; ++i) coeffs[i] = 0.4 * rng.normal();
    const double angle = 0.85;
    const Pose2D detections = project_model(tiny, coeffs, 1234.0, angle, kCamera);

    const RotationSolution sol = solve_rotation(detections, kCamera, tiny, angle);
    REQUIRE(sol.valid);
    const Pose2D reproj = project_pose(kCamera, sol.pose, 1.0);
    CHECK((reproj.joints - detections.joints).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("normal-equation gradient vanishes at the solution") {
    const PoseBasis basis = builtin_basis(8);
    detail::Rng rng(11);
    Eigen::VectorXd coeffs(8);
    for (int i = 0; i < 8; ++i) coeffs[i] = basis.sigmas[i] * rng.normal();
    Pose2D detections = project_model(basis, coeffs, 1000.0, 1.2, kCamera);
    for (int p = 0; p < 17; ++p) {
        detections.joints(0, p) += 2.0 * rng.normal();
        detections.joints(1, p) += 2.0 * rng.normal();
    }
    const RotationSolution sol = solve_rotation(detections, kCamera, basis, 1.2);
    REQUIRE(sol.valid);

    // Recompute the quadratic objective's gradient in (s, c) by finite
    // differences of the solved objective form.
    const double sigma_scale = estimate_projection_scale({detections}, basis.mean);
    auto surrogate = [&](double s, const Eigen::VectorXd& c) {
        Eigen::Matrix2Xd pred = Eigen::Matrix2Xd::Zero(2, 17);
        const Eigen::Matrix3d rot = rotation_about_y(1.2);
        pred += s * (kCamera.rotation * (rot * basis.mean.joints)).topRows<2>();
        for (int i = 0; i < 8; ++i) {
            pred += c[i] *
                    (kCamera.rotation * (rot * basis.components[i])).topRows<2>();
        }
        double reg = 0.0;
        for (int i = 0; i < 8; ++i) {
            const double se = basis.sigmas[i] / sigma_scale;
            reg += se * se * c[i] * c[i];
        }
        return (detections.joints - pred).squaredNorm() + reg;
    };
    // The objective is exactly quadratic, so central differences have no
    // truncation error; a generous step keeps cancellation noise down.
    const double f0 = surrogate(sol.scale, sol.combined);
    const double h = 1e-2;
    double max_grad = 0.0;
    max_grad = std::max(max_grad,
                        std::abs(surrogate(sol.scale + h, sol.combined) -
                                 surrogate(sol.scale - h, sol.combined)) /
                            (2 * h));
    for (int i = 0; i < 8; ++i) {
        Eigen::VectorXd up = sol.combined, dn = sol.combined;
        up[i] += h;
        dn[i] -= h;
        max_grad = std::max(
            max_grad, std::abs(surrogate(sol.scale, up) - surrogate(sol.scale, dn)) /
                          (2 * h));
    }
    CHECK(max_grad <= 1e-8 * std::max(1.0, f0));
}

TEST_CASE("too few visible joints is degenerate") {
    const PoseBasis basis = builtin_basis(6);
    Pose2D detections = project_model(basis, Eigen::VectorXd::Zero(6), 1.0, 0.0,
                                      kCamera);
    std::vector<std::uint8_t> vis(17, 0);
    vis[0] = vis[5] = vis[9] = 1;  // only 3 visible
    detections.visibility = vis;
    CHECK_THROWS_AS(solve_rotation(detections, kCamera, basis, 0.0),
                    DegenerateSystem);
}

TEST_CASE("single-joint input fails every rotation") {
    const PoseBasis basis = builtin_basis(6);
    Eigen::Matrix2Xd joints = Eigen::Matrix2Xd::Zero(2, 17);
    std::vector<std::uint8_t> vis(17, 0);
    vis[0] = 1;
    const Pose2D detections{Eigen::Matrix2Xd(joints), vis};
    CHECK_THROWS_AS(lift_single(detections, kCamera, basis,
                                RotationGrid::uniform(16), LiftConfig{}),
                    AllRotationsDegenerate);
}

TEST_CASE("planted rotation is found within one grid step") {
    const PoseBasis basis = builtin_basis(8);
    detail::Rng rng(23);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd coeffs(8);
        for (int i = 0; i < 8; ++i) coeffs[i] = basis.sigmas[i] * rng.normal();
        const double planted = rng.uniform(0.0, 2.0 * M_PI);
        const Pose2D detections =
            project_model(basis, coeffs, rng.uniform(900.0, 1100.0), planted, kCamera);
        LiftConfig config;
        config.rotation_mode = RotationMode::Argmin;
        const LiftResult result = lift_single(detections, kCamera, basis,
                                              RotationGrid::uniform(360), config);
        const double found = result.per_rotation[result.argmin_index].angle;
        const double diff =
            std::abs(std::remainder(found - planted, 2.0 * M_PI));
        CHECK(diff <= 2.0 * M_PI / 360.0 + 1e-12);
    }
}

TEST_CASE("huge rho makes marginalization match argmin") {
    const PoseBasis basis = builtin_basis(8);
    detail::Rng rng(31);
    Eigen::VectorXd coeffs(8);
    for (int i = 0; i < 8; ++i) coeffs[i] = basis.sigmas[i] * rng.normal();
    Pose2D detections = project_model(basis, coeffs, 1000.0, 2.2, kCamera);
    for (int p = 0; p < 17; ++p) detections.joints(0, p) += rng.normal();

    LiftConfig argmin;
    argmin.rotation_mode = RotationMode::Argmin;
    LiftConfig sharp;
    sharp.rotation_mode = RotationMode::Marginalize;
    sharp.rho = 1e9;
    const RotationGrid grid = RotationGrid::uniform(80);
    const LiftResult a = lift_single(detections, kCamera, basis, grid, argmin);
    const LiftResult m = lift_single(detections, kCamera, basis, grid, sharp);
    CHECK((a.pose.joints - m.pose.joints).cwiseAbs().maxCoeff() < 1e-6 * 1000.0);
}

TEST_CASE("marginalization weights: normalization and shift invariance") {
    std::vector<double> costs = {5.0, 1.0, 9.0, 1.5, 40.0,
                                 std::numeric_limits<double>::infinity()};
    for (RhoMode mode : {RhoMode::Adaptive, RhoMode::Fixed}) {
        LiftConfig config;
        config.rho_mode = mode;
        config.rho = mode == RhoMode::Fixed ? 0.7 : 3.0;
        const auto w = marginalization_weights(costs, config);
        double total = 0.0;
        for (double x : w) total += x;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(w[5] == 0.0);

        std::vector<double> shifted = costs;
        for (double& c : shifted) c += 123.0;
        const auto w2 = marginalization_weights(shifted, config);
        for (size_t i = 0; i < w.size(); ++i) {
            CHECK(w2[i] == doctest::Approx(w[i]).epsilon(1e-12));
        }
    }
    // Equal finite costs spread uniformly.
    LiftConfig config;
    const auto uniform = marginalization_weights({2.0, 2.0, 2.0, 2.0}, config);
    for (double x : uniform) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("per-rotation objective is convex in (s, c)") {
    const PoseBasis basis = builtin_basis(4);
    detail::Rng rng(47);
    Pose2D detections = project_model(basis, Eigen::VectorXd::Zero(4), 950.0, 0.4,
                                      kCamera);
    for (int p = 0; p < 17; ++p) detections.joints(1, p) += 3.0 * rng.normal();

    const double sigma_scale = estimate_projection_scale({detections}, basis.mean);
    auto objective = [&](const Eigen::VectorXd& sc) {
        Eigen::Matrix2Xd pred =
            sc[0] * (kCamera.rotation * (rotation_about_y(0.4) * basis.mean.joints))
                        .topRows<2>();
        for (int i = 0; i < 4; ++i) {
            pred += sc[1 + i] * (kCamera.rotation *
                                 (rotation_about_y(0.4) * basis.components[i]))
                                    .topRows<2>();
        }
        double reg = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double se = basis.sigmas[i] / sigma_scale;
            reg += se * se * sc[1 + i] * sc[1 + i];
        }
        return (detections.joints - pred).squaredNorm() + reg;
    };
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd x(5), y(5);
        for (int i = 0; i < 5; ++i) {
            x[i] = 500.0 * rng.normal();
            y[i] = 500.0 * rng.normal();
        }
        const double t = rng.uniform();
        const double lhs = objective(t * x + (1.0 - t) * y);
        const double rhs = t * objective(x) + (1.0 - t) * objective(y);
        CHECK(lhs <= rhs + 1e-9 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("grid refinement can only lower the minimum cost") {
    const PoseBasis basis = builtin_basis(6);
    detail::Rng rng(53);
    Eigen::VectorXd coeffs(6);
    for (int i = 0; i < 6; ++i) coeffs[i] = basis.sigmas[i] * rng.normal();
    const Pose2D detections = project_model(basis, coeffs, 1000.0, 1.9, kCamera);

    LiftConfig config;
    config.rotation_mode = RotationMode::Argmin;
    const LiftResult coarse = lift_single(detections, kCamera, basis,
                                          RotationGrid::uniform(80), config);
    const LiftResult fine = lift_single(detections, kCamera, basis,
                                        RotationGrid::uniform(160), config);
    CHECK(fine.per_rotation[fine.argmin_index].cost <=
          coarse.per_rotation[coarse.argmin_index].cost + 1e-12);
}

TEST_CASE("exact coefficient penalty agrees with the combined solve") {
    // With the data-unit scaling the two penalties are nearly identical, so
    // the alternating path must land close to the single-solve path.
    const PoseBasis basis = builtin_basis(6);
    detail::Rng rng(61);
    Eigen::VectorXd coeffs(6);
    for (int i = 0; i < 6; ++i) coeffs[i] = basis.sigmas[i] * rng.normal();
    Pose2D detections = project_model(basis, coeffs, 1000.0, 0.9, kCamera);
    for (int p = 0; p < 17; ++p) {
        detections.joints(0, p) += 1.5 * rng.normal();
        detections.joints(1, p) += 1.5 * rng.normal();
    }
    LiftConfig combined;
    LiftConfig exact;
    exact.exact_coefficient_penalty = true;
    const RotationSolution a = solve_rotation(detections, kCamera, basis, 0.9, combined);
    const RotationSolution b = solve_rotation(detections, kCamera, basis, 0.9, exact);
    REQUIRE(a.valid);
    REQUIRE(b.valid);
    CHECK(std::abs(a.scale - b.scale) / a.scale < 1e-3);
    CHECK((a.pose.joints - b.pose.joints).cwiseAbs().maxCoeff() < 1.0);
}

TEST_CASE("marginalization is steadier than argmin on ambiguous sequences") {
    const mvtest::StabilityResult r = mvtest::run_stability_sequence(2024);
    CHECK(r.marginalize_max_jump < r.argmin_max_jump);
    // The argmin trajectory genuinely flips between the two wells.
    CHECK(r.argmin_max_jump > 100.0);
}

TEST_CASE("lift result bookkeeping") {
    const PoseBasis basis = builtin_basis(4);
    const Pose2D detections =
        project_model(basis, Eigen::VectorXd::Zero(4), 1000.0, 0.0, kCamera);
    const RotationGrid grid = RotationGrid::uniform(16);
    LiftConfig config;
    config.rotation_mode = RotationMode::Marginalize;
    const LiftResult result = lift_single(detections, kCamera, basis, grid, config);
    REQUIRE(result.per_rotation.size() == 16);
    REQUIRE(result.weights.size() == 16);
    double total = 0.0;
    Eigen::Matrix3Xd blended = Eigen::Matrix3Xd::Zero(3, 17);
    for (size_t i = 0; i < result.weights.size(); ++i) {
        total += result.weights[i];
        blended += result.weights[i] * result.per_rotation[i].pose.joints;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((blended - result.pose.joints).cwiseAbs().maxCoeff() < 1e-9);
}
