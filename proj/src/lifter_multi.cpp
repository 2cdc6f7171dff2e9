// SPDX-License-Identifier: Apache-2.0
#include "mvlift/lifter_multi.hpp"

#include "mvlift/detail/numeric.hpp"
#include "mvlift/lifter_single.hpp"

#include <cmath>
#include <optional>

namespace mvlift {

double huber_value(double t, double epsilon) {
    const double a = std::abs(t);
    if (a <= epsilon) return 0.5 * t * t;
    return epsilon * a - 0.5 * epsilon * epsilon;
}

double huber_weight(double t, double epsilon) {
    const double a = std::abs(t);
    if (a <= epsilon) return 1.0;
    return epsilon / a;
}

void MultiViewProblem::validate() const {
    config.validate();
    if (detections.size() != static_cast<size_t>(rig.camera_count())) {
        throw InvalidArgument("MultiViewProblem: one detection set per camera required");
    }
    int usable = 0;
    for (const Pose2D& d : detections) {
        if (d.joint_count() != basis.joint_count()) {
            throw JointCountMismatch("MultiViewProblem: detections do not match basis");
        }
        if (d.visible_count() >= 4) ++usable;
    }
    if (usable == 0) {
        throw DegenerateSystem("MultiViewProblem: no camera sees at least 4 joints");
    }
}

namespace {

struct DataPoint {
    int cam;
    int joint;
};

// Flattened view of the visible data: camera-major, joint-major, two scalar
// components (x, y) per point.
struct ProblemView {
    const MultiViewProblem* problem = nullptr;
    std::vector<DataPoint> points;
    Eigen::VectorXd target;  // 2 * points.size()
    std::vector<Eigen::Matrix<double, 2, 3>> cam_rows;
    int joints = 0;
    int bsize = 0;
    int extra = 0;    // 1 + bsize
    int scalars = 0;  // 2 * points
    /// Data-units-per-model-unit estimate; the coefficient penalty is
    /// sigma^2 (c / sigma_scale)^2 so it matches sigma^2 a^2 instead of
    /// picking up an extra scale^2 through c = s * a.
    double sigma_scale = 1.0;
};

ProblemView make_view(const MultiViewProblem& problem) {
    ProblemView view;
    view.problem = &problem;
    view.joints = problem.basis.joint_count();
    view.bsize = problem.basis.size();
    view.extra = 1 + view.bsize;
    for (const Camera& cam : problem.rig.cameras) {
        view.cam_rows.push_back(cam.rotation.topRows<2>());
    }
    for (int c = 0; c < problem.rig.camera_count(); ++c) {
        const Pose2D& det = problem.detections[static_cast<size_t>(c)];
        for (int p = 0; p < view.joints; ++p) {
            if (det.visible(p)) view.points.push_back({c, p});
        }
    }
    view.scalars = 2 * static_cast<int>(view.points.size());
    view.sigma_scale = estimate_projection_scale(problem.detections, problem.basis.mean);
    view.target.resize(view.scalars);
    for (size_t k = 0; k < view.points.size(); ++k) {
        const DataPoint& pt = view.points[k];
        view.target.segment<2>(2 * static_cast<Eigen::Index>(k)) =
            problem.detections[static_cast<size_t>(pt.cam)].joints.col(pt.joint);
    }
    return view;
}

// Rotation-dependent model quantities.
struct AngleModel {
    Eigen::VectorXd mean_vec;     // vec(R * mean), 3P
    Eigen::MatrixXd comps;        // [vec(R * e_i)], 3P x B
    Eigen::MatrixXd coupling;     // -2 [mean_vec comps], 3P x extra
    Eigen::MatrixXd model_block;  // 2 Gram + 2 diag(0, sigma^2), extra x extra
};

AngleModel make_angle_model(const ProblemView& view, double angle) {
    const PoseBasis& basis = view.problem->basis;
    const Eigen::Matrix3d rot = rotation_about_y(angle);
    AngleModel model;
    model.mean_vec = Pose3D(rot * basis.mean.joints).vectorized();
    model.comps.resize(3 * view.joints, view.bsize);
    for (int i = 0; i < view.bsize; ++i) {
        model.comps.col(i) =
            Pose3D(rot * basis.components[static_cast<size_t>(i)]).vectorized();
    }
    Eigen::MatrixXd g(3 * view.joints, view.extra);
    g.col(0) = model.mean_vec;
    g.rightCols(view.bsize) = model.comps;
    model.coupling = -2.0 * g;
    model.model_block = 2.0 * (g.transpose() * g);
    model.model_block.diagonal().tail(view.bsize) +=
        2.0 * (basis.sigmas.array() / view.sigma_scale).square().matrix();
    return model;
}

// Normal equations of the weighted subproblem, factorized by eliminating the
// per-joint 3x3 blocks of the shape and LDLT-solving the reduced system in
// (s, c). Tikhonov jitter is applied to the reduced system on reported
// singularity (see detail::SpdSolver).
class BlockFactor {
  public:
    BlockFactor(const ProblemView& view, const AngleModel& model,
                const Eigen::VectorXd& weights)
        : joints_(view.joints), extra_(view.extra), coupling_(&model.coupling) {
        const double lambda = view.problem->config.lambda;
        std::vector<Eigen::Matrix3d> qq(
            static_cast<size_t>(joints_),
            2.0 * Eigen::Matrix3d::Identity());
        for (size_t k = 0; k < view.points.size(); ++k) {
            const DataPoint& pt = view.points[k];
            const auto& rows = view.cam_rows[static_cast<size_t>(pt.cam)];
            const Eigen::Vector2d w = weights.segment<2>(2 * static_cast<Eigen::Index>(k));
            qq[static_cast<size_t>(pt.joint)] +=
                lambda * rows.transpose() * w.asDiagonal() * rows;
        }
        qq_inv_.reserve(qq.size());
        for (const auto& block : qq) {
            qq_inv_.push_back(block.inverse());
        }
        Eigen::MatrixXd folded(3 * joints_, extra_);
        for (int p = 0; p < joints_; ++p) {
            folded.middleRows<3>(3 * p) =
                qq_inv_[static_cast<size_t>(p)] * model.coupling.middleRows<3>(3 * p);
        }
        const Eigen::MatrixXd schur =
            model.model_block - model.coupling.transpose() * folded;
        reduced_.emplace(schur);
    }

    Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
        const Eigen::MatrixXd bq = rhs.topRows(3 * joints_);
        const Eigen::MatrixXd bsc = rhs.bottomRows(extra_);
        const Eigen::MatrixXd t = apply_qq_inv(bq);
        const Eigen::MatrixXd y = reduced_->solve(
            (bsc - coupling_->transpose() * t).eval());
        Eigen::MatrixXd x(rhs.rows(), rhs.cols());
        x.topRows(3 * joints_) = apply_qq_inv(bq - *coupling_ * y);
        x.bottomRows(extra_) = y;
        return x;
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        return solve(Eigen::MatrixXd(rhs));
    }

  private:
    Eigen::MatrixXd apply_qq_inv(const Eigen::MatrixXd& v) const {
        Eigen::MatrixXd out(v.rows(), v.cols());
        for (int p = 0; p < joints_; ++p) {
            out.middleRows<3>(3 * p) =
                qq_inv_[static_cast<size_t>(p)] * v.middleRows<3>(3 * p);
        }
        return out;
    }

    int joints_;
    int extra_;
    const Eigen::MatrixXd* coupling_;
    std::vector<Eigen::Matrix3d> qq_inv_;
    std::optional<detail::SpdSolver> reduced_;
};

Eigen::VectorXd assemble_rhs(const ProblemView& view, const Eigen::VectorXd& weights) {
    const double lambda = view.problem->config.lambda;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * view.joints + view.extra);
    for (size_t k = 0; k < view.points.size(); ++k) {
        const DataPoint& pt = view.points[k];
        const auto& rows = view.cam_rows[static_cast<size_t>(pt.cam)];
        const Eigen::Vector2d w = weights.segment<2>(2 * static_cast<Eigen::Index>(k));
        const Eigen::Vector2d u = view.target.segment<2>(2 * static_cast<Eigen::Index>(k));
        rhs.segment<3>(3 * pt.joint) +=
            lambda * rows.transpose() * (w.array() * u.array()).matrix();
    }
    return rhs;
}

Eigen::VectorXd data_residual(const ProblemView& view, const Eigen::VectorXd& x) {
    Eigen::VectorXd r(view.scalars);
    for (size_t k = 0; k < view.points.size(); ++k) {
        const DataPoint& pt = view.points[k];
        const auto& rows = view.cam_rows[static_cast<size_t>(pt.cam)];
        r.segment<2>(2 * static_cast<Eigen::Index>(k)) =
            view.target.segment<2>(2 * static_cast<Eigen::Index>(k)) -
            rows * x.segment<3>(3 * pt.joint);
    }
    return r;
}

double objective_at(const ProblemView& view, const AngleModel& model,
                    const Eigen::VectorXd& x, RobustMode mode, double epsilon) {
    const MultiViewProblem& problem = *view.problem;
    const Eigen::VectorXd r = data_residual(view, x);
    double data = 0.0;
    if (mode == RobustMode::Huber) {
        for (Eigen::Index i = 0; i < r.size(); ++i) data += huber_value(r[i], epsilon);
    } else {
        data = 0.5 * r.squaredNorm();
    }
    const Eigen::VectorXd model_res = x.head(3 * view.joints) -
                                      x[3 * view.joints] * model.mean_vec -
                                      model.comps * x.tail(view.bsize);
    const Eigen::VectorXd c = x.tail(view.bsize);
    const double reg = ((problem.basis.sigmas.array() / view.sigma_scale).square() *
                        c.array().square())
                           .sum();
    return problem.config.lambda * data + model_res.squaredNorm() + reg;
}

// Robust scale estimate 1.4826 * median(|r - median(r)|). Floored at a tiny
// fraction of the data magnitude: on near-perfect detections the MAD
// collapses to numerical noise and an un-floored knee would turn the data
// term into a vanishing-weight l1 that the regularizer overpowers.
double adaptive_epsilon(const Eigen::VectorXd& residuals,
                        const Eigen::VectorXd& target) {
    std::vector<double> v(residuals.data(), residuals.data() + residuals.size());
    const double med = detail::median(v);
    for (double& t : v) t = std::abs(t - med);
    const double mad = detail::median(std::move(v));
    const double data_rms =
        target.size() > 0 ? std::sqrt(target.squaredNorm() / target.size()) : 0.0;
    return std::max({1.4826 * mad, 1e-5 * data_rms, 1e-12});
}

// Per-solve state kept for differentiation.
struct SolveRecord {
    BlockFactor factor;
    Eigen::VectorXd weights;   // used by this solve
    Eigen::VectorXd solution;  // x after this solve
    Eigen::VectorXd residual;  // data residual at `solution`
};

struct WarpRun {
    WarpSolution solution;
    std::vector<SolveRecord> records;
    ProblemView view;
    AngleModel model;
};

WarpSolution finalize(const ProblemView& view, const WarpRun& run,
                      const Eigen::VectorXd& x, const Eigen::VectorXd& weights,
                      const Eigen::VectorXd& residual, double angle, double epsilon,
                      std::vector<double> trace) {
    WarpSolution sol;
    sol.angle = angle;
    sol.epsilon = epsilon;
    sol.sigma_scale = view.sigma_scale;
    sol.warped = Pose3D::from_vector(x.head(3 * view.joints));
    sol.scale = x[3 * view.joints];
    sol.combined = x.tail(view.bsize);
    sol.coefficients = sol.scale != 0.0
                           ? Eigen::VectorXd(sol.combined / sol.scale)
                           : Eigen::VectorXd::Zero(view.bsize);
    const int cams = view.problem->rig.camera_count();
    sol.residuals.assign(static_cast<size_t>(cams),
                         Eigen::Matrix2Xd::Zero(2, view.joints));
    sol.weights.assign(static_cast<size_t>(cams),
                       Eigen::Matrix2Xd::Zero(2, view.joints));
    for (size_t k = 0; k < view.points.size(); ++k) {
        const DataPoint& pt = view.points[k];
        sol.residuals[static_cast<size_t>(pt.cam)].col(pt.joint) =
            residual.segment<2>(2 * static_cast<Eigen::Index>(k));
        sol.weights[static_cast<size_t>(pt.cam)].col(pt.joint) =
            weights.segment<2>(2 * static_cast<Eigen::Index>(k));
    }
    sol.objective_trace = std::move(trace);
    sol.cost = sol.objective_trace.back();
    sol.valid = true;
    (void)run;
    return sol;
}

WarpRun run_warp(const MultiViewProblem& problem, double angle, RobustMode mode,
                 bool keep_records) {
    problem.validate();
    WarpRun run;
    run.view = make_view(problem);
    run.model = make_angle_model(run.view, angle);
    const ProblemView& view = run.view;

    Eigen::VectorXd weights = Eigen::VectorXd::Ones(view.scalars);
    BlockFactor factor(view, run.model, weights);
    Eigen::VectorXd x = factor.solve(assemble_rhs(view, weights));
    Eigen::VectorXd residual = data_residual(view, x);
    if (keep_records) run.records.push_back({factor, weights, x, residual});

    if (mode == RobustMode::Frobenius) {
        std::vector<double> trace = {
            objective_at(view, run.model, x, RobustMode::Frobenius, 0.0)};
        run.solution = finalize(view, run, x, weights, residual, angle, 0.0,
                                std::move(trace));
        return run;
    }

    const double epsilon = problem.config.epsilon_mode == EpsilonMode::Fixed
                               ? problem.config.huber_epsilon
                               : adaptive_epsilon(residual, view.target);
    std::vector<double> trace = {
        objective_at(view, run.model, x, RobustMode::Huber, epsilon)};
    for (int it = 0; it < problem.config.irls_iterations; ++it) {
        for (Eigen::Index i = 0; i < weights.size(); ++i) {
            weights[i] = huber_weight(residual[i], epsilon);
        }
        BlockFactor step(view, run.model, weights);
        x = step.solve(assemble_rhs(view, weights));
        residual = data_residual(view, x);
        trace.push_back(objective_at(view, run.model, x, RobustMode::Huber, epsilon));
        if (keep_records) run.records.push_back({step, weights, x, residual});
    }
    run.solution =
        finalize(view, run, x, weights, residual, angle, epsilon, std::move(trace));
    return run;
}

}  // namespace

WarpSolution warp_frobenius(const MultiViewProblem& problem, double angle) {
    return run_warp(problem, angle, RobustMode::Frobenius, false).solution;
}

WarpSolution warp_huber(const MultiViewProblem& problem, double angle) {
    return run_warp(problem, angle, RobustMode::Huber, false).solution;
}

MultiViewLiftResult lift_multi(const MultiViewProblem& problem,
                               const RotationGrid& grid) {
    problem.validate();
    MultiViewLiftResult result;
    result.mode = problem.config.rotation_mode;
    result.per_rotation.reserve(static_cast<size_t>(grid.size()));

    std::vector<double> costs(static_cast<size_t>(grid.size()),
                              std::numeric_limits<double>::infinity());
    for (int i = 0; i < grid.size(); ++i) {
        WarpSolution sol;
        try {
            sol = run_warp(problem, grid.angles[i], problem.config.robust_mode, false)
                      .solution;
        } catch (const DegenerateSystem& err) {
            sol.angle = grid.angles[i];
            sol.valid = false;
            sol.failure = err.what();
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
        throw AllRotationsDegenerate("lift_multi: every rotation failed");
    }
    result.argmin_index = best;

    if (result.mode == RotationMode::Argmin) {
        result.pose = result.per_rotation[static_cast<size_t>(best)].warped;
        return result;
    }

    result.weights = marginalization_weights(costs, problem.config);
    Eigen::Matrix3Xd averaged =
        Eigen::Matrix3Xd::Zero(3, problem.basis.joint_count());
    for (size_t i = 0; i < result.weights.size(); ++i) {
        if (result.weights[i] > 0.0) {
            averaged += result.weights[i] * result.per_rotation[i].warped.joints;
        }
    }
    result.pose = Pose3D(std::move(averaged));
    return result;
}

Eigen::MatrixXd lift_jacobian(const MultiViewProblem& problem, double angle) {
    const WarpRun run = run_warp(problem, angle, problem.config.robust_mode, true);
    const ProblemView& view = run.view;
    const double lambda = problem.config.lambda;
    const double epsilon = run.solution.epsilon;
    const int n = 3 * view.joints + view.extra;
    const int m = view.scalars;

    // d(solve k)/d(data) for the initial pass: rhs columns lambda * D^T W.
    auto data_rows_transpose = [&](const Eigen::MatrixXd& coeffs) {
        // Maps an m x m matrix of per-component coefficients to lambda * D^T * coeffs
        // laid out on the full unknown vector (zero rows for s and c).
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, m);
        for (size_t k = 0; k < view.points.size(); ++k) {
            const DataPoint& pt = view.points[k];
            const auto& rows = view.cam_rows[static_cast<size_t>(pt.cam)];
            for (int axis = 0; axis < 2; ++axis) {
                const Eigen::Index comp = 2 * static_cast<Eigen::Index>(k) + axis;
                out.middleRows<3>(3 * pt.joint) +=
                    lambda * rows.row(axis).transpose() * coeffs.row(comp);
            }
        }
        return out;
    };

    Eigen::MatrixXd jac = run.records[0].factor.solve(
        data_rows_transpose(Eigen::MatrixXd(run.records[0].weights.asDiagonal())));

    for (size_t k = 1; k < run.records.size(); ++k) {
        const SolveRecord& rec = run.records[k];
        const Eigen::VectorXd& prev_residual = run.records[k - 1].residual;
        // d(residual_{k-1})/d(data) = I - D * (shape rows of jac)
        Eigen::MatrixXd dres = Eigen::MatrixXd::Identity(m, m);
        for (size_t j = 0; j < view.points.size(); ++j) {
            const DataPoint& pt = view.points[j];
            const auto& rows = view.cam_rows[static_cast<size_t>(pt.cam)];
            dres.middleRows<2>(2 * static_cast<Eigen::Index>(j)) -=
                rows * jac.middleRows<3>(3 * pt.joint);
        }
        // Active-branch weight derivative; zero inside the knee.
        Eigen::VectorXd dw(m);
        for (int i = 0; i < m; ++i) {
            const double r = prev_residual[i];
            dw[i] = std::abs(r) <= epsilon
                        ? 0.0
                        : -epsilon * (r > 0 ? 1.0 : -1.0) / (r * r);
        }
        Eigen::MatrixXd coeffs = Eigen::MatrixXd(rec.weights.asDiagonal());
        coeffs.noalias() +=
            rec.residual.asDiagonal() * Eigen::MatrixXd(dw.asDiagonal() * dres);
        jac = rec.factor.solve(data_rows_transpose(coeffs));
    }

    // Expand the visible-component columns to the full camera-major layout.
    const int cams = problem.rig.camera_count();
    Eigen::MatrixXd full =
        Eigen::MatrixXd::Zero(3 * view.joints, 2 * view.joints * cams);
    for (size_t k = 0; k < view.points.size(); ++k) {
        const DataPoint& pt = view.points[k];
        const Eigen::Index col = 2 * (static_cast<Eigen::Index>(pt.cam) * view.joints +
                                      pt.joint);
        full.col(col) = jac.col(2 * static_cast<Eigen::Index>(k)).head(3 * view.joints);
        full.col(col + 1) =
            jac.col(2 * static_cast<Eigen::Index>(k) + 1).head(3 * view.joints);
    }
    return full;
}

Eigen::MatrixXd lift_jacobian_fd(const MultiViewProblem& problem, double angle,
                                 double step) {
    if (!(step > 0.0)) throw InvalidArgument("lift_jacobian_fd: step must be positive");
    problem.validate();
    const int joints = problem.basis.joint_count();
    const int cams = problem.rig.camera_count();
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(3 * joints, 2 * joints * cams);

    auto solve_vec = [&](const MultiViewProblem& p) {
        return run_warp(p, angle, p.config.robust_mode, false)
            .solution.warped.vectorized();
    };
    for (int c = 0; c < cams; ++c) {
        for (int p = 0; p < joints; ++p) {
            if (!problem.detections[static_cast<size_t>(c)].visible(p)) continue;
            for (int axis = 0; axis < 2; ++axis) {
                MultiViewProblem plus = problem;
                MultiViewProblem minus = problem;
                plus.detections[static_cast<size_t>(c)].joints(axis, p) += step;
                minus.detections[static_cast<size_t>(c)].joints(axis, p) -= step;
                full.col(2 * (static_cast<Eigen::Index>(c) * joints + p) + axis) =
                    (solve_vec(plus) - solve_vec(minus)) / (2.0 * step);
            }
        }
    }
    return full;
}

}  // namespace mvlift
