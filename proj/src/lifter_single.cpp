// SPDX-License-Identifier: Apache-2.0
#include "mvlift/lifter_single.hpp"

#include "mvlift/detail/numeric.hpp"

#include <cmath>

namespace mvlift {

namespace {

constexpr int kMinVisibleJoints = 4;

struct SingleSystem {
    Eigen::MatrixXd design;  // 2V x (1 + B); column 0 is the mean direction
    Eigen::VectorXd target;  // stacked visible detections
};

SingleSystem build_system(const Pose2D& detections, const Camera& camera,
                          const PoseBasis& basis, double angle) {
    const int joints = basis.joint_count();
    const int bsize = basis.size();
    const Eigen::Matrix3d rot = rotation_about_y(angle);
    const Eigen::Matrix2Xd mean_proj =
        (camera.rotation * (rot * basis.mean.joints)).topRows<2>();
    std::vector<Eigen::Matrix2Xd> comp_proj;
    comp_proj.reserve(static_cast<size_t>(bsize));
    for (const auto& comp : basis.components) {
        comp_proj.push_back((camera.rotation * (rot * comp)).topRows<2>());
    }

    SingleSystem sys;
    sys.design.resize(2 * detections.visible_count(), 1 + bsize);
    sys.target.resize(2 * detections.visible_count());
    int row = 0;
    for (int p = 0; p < joints; ++p) {
        if (!detections.visible(p)) continue;
        sys.target.segment<2>(row) = detections.joints.col(p);
        sys.design.block<2, 1>(row, 0) = mean_proj.col(p);
        for (int i = 0; i < bsize; ++i) {
            sys.design.block<2, 1>(row, 1 + i) = comp_proj[static_cast<size_t>(i)].col(p);
        }
        row += 2;
    }
    return sys;
}

double objective_value(const SingleSystem& sys, const PoseBasis& basis,
                       double scale, const Eigen::VectorXd& coeffs) {
    Eigen::VectorXd x(1 + basis.size());
    x[0] = scale;
    x.tail(basis.size()) = scale * coeffs;
    const double data = (sys.target - sys.design * x).squaredNorm();
    const double reg = (basis.sigmas.array().square() * coeffs.array().square()).sum();
    return data + reg;
}

// Alternating minimization for the literal a-penalty: ridge solve for a at
// fixed s, closed-form s at fixed a.
void solve_alternating(const SingleSystem& sys, const PoseBasis& basis,
                       double& scale, Eigen::VectorXd& coeffs) {
    const int bsize = basis.size();
    const Eigen::VectorXd mean_col = sys.design.col(0);
    const Eigen::MatrixXd comp_cols = sys.design.rightCols(bsize);
    const Eigen::MatrixXd comp_gram = comp_cols.transpose() * comp_cols;
    const Eigen::VectorXd sigma_sq = basis.sigmas.array().square();

    for (int it = 0; it < 100; ++it) {
        Eigen::MatrixXd h = scale * scale * comp_gram;
        h.diagonal() += sigma_sq;
        const Eigen::VectorXd rhs =
            scale * comp_cols.transpose() * (sys.target - scale * mean_col);
        const Eigen::VectorXd next_coeffs = detail::solve_spd(h, rhs);

        const Eigen::VectorXd direction = mean_col + comp_cols * next_coeffs;
        const double denom = direction.squaredNorm();
        if (!(denom > 0.0)) {
            throw DegenerateSystem("solve_rotation: zero model direction");
        }
        const double next_scale = direction.dot(sys.target) / denom;
        const double delta = std::abs(next_scale - scale) +
                             (next_coeffs - coeffs).cwiseAbs().maxCoeff();
        scale = next_scale;
        coeffs = next_coeffs;
        if (delta < 1e-14) break;
    }
}

}  // namespace

RotationSolution solve_rotation(const Pose2D& detections, const Camera& camera,
                                const PoseBasis& basis, double angle,
                                const LiftConfig& config) {
    if (detections.joint_count() != basis.joint_count()) {
        throw JointCountMismatch("solve_rotation: detections do not match basis");
    }
    if (detections.visible_count() < kMinVisibleJoints) {
        throw DegenerateSystem("solve_rotation: fewer than 4 visible joints");
    }
    config.validate();

    const SingleSystem sys = build_system(detections, camera, basis, angle);
    const int bsize = basis.size();

    // The penalty is expressed in data units: sigma^2 (c / s_hat)^2 with a
    // crude per-problem scale estimate, so it matches sigma^2 a^2 instead of
    // acquiring an extra factor of scale^2 through c = s * a.
    const double sigma_scale =
        estimate_projection_scale({detections}, basis.mean);
    Eigen::MatrixXd h = sys.design.transpose() * sys.design;
    h.diagonal().tail(bsize) +=
        (basis.sigmas.array() / sigma_scale).square().matrix();
    const Eigen::VectorXd x =
        detail::solve_spd(h, sys.design.transpose() * sys.target);

    RotationSolution sol;
    sol.angle = angle;
    sol.scale = x[0];
    sol.combined = x.tail(bsize);

    if (!(sol.scale > 0.0)) {
        sol.valid = false;
        sol.failure = "NonPositiveScale";
        sol.coefficients = Eigen::VectorXd::Zero(bsize);
        sol.pose = Pose3D::zero(basis.joint_count());
        sol.cost = std::numeric_limits<double>::infinity();
        return sol;
    }

    sol.coefficients = sol.combined / sol.scale;
    if (config.exact_coefficient_penalty) {
        solve_alternating(sys, basis, sol.scale, sol.coefficients);
        if (!(sol.scale > 0.0)) {
            sol.valid = false;
            sol.failure = "NonPositiveScale";
            sol.pose = Pose3D::zero(basis.joint_count());
            sol.cost = std::numeric_limits<double>::infinity();
            return sol;
        }
        sol.combined = sol.scale * sol.coefficients;
    }

    sol.pose = Pose3D(sol.scale * (rotation_about_y(angle) *
                                   basis.model_pose(sol.coefficients).joints));
    sol.cost = objective_value(sys, basis, sol.scale, sol.coefficients);
    sol.valid = true;
    return sol;
}

std::vector<double> marginalization_weights(const std::vector<double>& costs,
                                            const LiftConfig& config) {
    double rho_eff = config.rho;
    if (config.rho_mode == RhoMode::Adaptive) {
        std::vector<double> finite;
        finite.reserve(costs.size());
        double cmin = std::numeric_limits<double>::infinity();
        for (double c : costs) {
            if (std::isfinite(c)) {
                finite.push_back(c);
                cmin = std::min(cmin, c);
            }
        }
        if (finite.empty()) return std::vector<double>(costs.size(), 0.0);
        const double spread = detail::median(finite) - cmin;
        // Zero spread means indistinguishable rotations: uniform weights.
        rho_eff = spread > 0.0 ? config.rho / spread : 0.0;
    }
    return detail::softmin_weights(costs, rho_eff);
}

LiftResult lift_single(const Pose2D& detections, const Camera& camera,
                       const PoseBasis& basis, const RotationGrid& grid,
                       const LiftConfig& config) {
    config.validate();
    LiftResult result;
    result.mode = config.rotation_mode;
    result.per_rotation.reserve(static_cast<size_t>(grid.size()));

    std::vector<double> costs(static_cast<size_t>(grid.size()),
                              std::numeric_limits<double>::infinity());
    for (int i = 0; i < grid.size(); ++i) {
        RotationSolution sol;
        try {
            sol = solve_rotation(detections, camera, basis, grid.angles[i], config);
        } catch (const DegenerateSystem& err) {
            sol.angle = grid.angles[i];
            sol.valid = false;
            sol.failure = err.what();
            sol.pose = Pose3D::zero(basis.joint_count());
        }
        costs[static_cast<size_t>(i)] = sol.cost;
        result.per_rotation.push_back(std::move(sol));
    }

    int best = -1;
    for (int i = 0; i < grid.size(); ++i) {
        const double c = costs[static_cast<size_t>(i)];
        if (std::isfinite(c) && (best < 0 || c < costs[static_cast<size_t>(best)])) {
            best = i;
        }
    }
    if (best < 0) {
        throw AllRotationsDegenerate("lift_single: every rotation failed");
    }
    result.argmin_index = best;

    if (config.rotation_mode == RotationMode::Argmin) {
        result.pose = result.per_rotation[static_cast<size_t>(best)].pose;
        return result;
    }

    result.weights = marginalization_weights(costs, config);
    Eigen::Matrix3Xd averaged = Eigen::Matrix3Xd::Zero(3, basis.joint_count());
    for (size_t i = 0; i < result.weights.size(); ++i) {
        if (result.weights[i] > 0.0) {
            averaged += result.weights[i] * result.per_rotation[i].pose.joints;
        }
    }
    result.pose = Pose3D(std::move(averaged));
    return result;
}

}  // namespace mvlift
