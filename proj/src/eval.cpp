// SPDX-License-Identifier: Apache-2.0
#include "mvlift/eval.hpp"

#include "mvlift/detail/numeric.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mvlift {

namespace {

std::vector<int> all_joints(int count) {
    std::vector<int> idx(static_cast<size_t>(count));
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

void check_joint_counts(const Pose3D& pred, const Pose3D& gt) {
    if (pred.joint_count() != gt.joint_count()) {
        throw JointCountMismatch("pose metric: joint counts differ");
    }
}

}  // namespace

double mpjpe_p1(const Pose3D& pred, const Pose3D& gt) {
    check_joint_counts(pred, gt);
    const Eigen::Matrix3Xd a = pred.joints.colwise() - Eigen::Vector3d(pred.joints.col(0));
    const Eigen::Matrix3Xd b = gt.joints.colwise() - Eigen::Vector3d(gt.joints.col(0));
    return (a - b).colwise().norm().mean();
}

Similarity procrustes_align(const Pose3D& from, const Pose3D& to,
                            const std::vector<int>& subset) {
    check_joint_counts(from, to);
    const std::vector<int>& idx =
        subset.empty() ? all_joints(from.joint_count()) : subset;
    const int k = static_cast<int>(idx.size());
    if (k < 3) {
        throw DegenerateAlignment("procrustes_align: fewer than 3 joints");
    }
    Eigen::Matrix3Xd x(3, k);
    Eigen::Matrix3Xd y(3, k);
    for (int i = 0; i < k; ++i) {
        x.col(i) = from.joints.col(idx[static_cast<size_t>(i)]);
        y.col(i) = to.joints.col(idx[static_cast<size_t>(i)]);
    }
    const Eigen::Vector3d mx = x.rowwise().mean();
    const Eigen::Vector3d my = y.rowwise().mean();
    x.colwise() -= mx;
    y.colwise() -= my;

    const Eigen::Matrix3d cross = y * x.transpose() / static_cast<double>(k);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d d = svd.singularValues();
    if (!(d[1] > 1e-12 * std::max(d[0], 1e-300))) {
        throw DegenerateAlignment("procrustes_align: rank-deficient cross-covariance");
    }
    Eigen::Vector3d flip = Eigen::Vector3d::Ones();
    if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
        flip[2] = -1.0;
    }
    const double var_x = x.squaredNorm() / static_cast<double>(k);
    if (!(var_x > 0.0)) {
        throw DegenerateAlignment("procrustes_align: degenerate source pose");
    }

    Similarity sim;
    sim.rotation = svd.matrixU() * flip.asDiagonal() * svd.matrixV().transpose();
    sim.scale = d.dot(flip) / var_x;
    sim.translation = my - sim.scale * (sim.rotation * mx);
    return sim;
}

double mpjpe_p2(const Pose3D& pred, const Pose3D& gt,
                const std::vector<int>& subset) {
    check_joint_counts(pred, gt);
    const std::vector<int>& idx =
        subset.empty() ? all_joints(pred.joint_count()) : subset;
    const Similarity sim = procrustes_align(pred, gt, idx);
    double total = 0.0;
    for (int j : idx) {
        total += (sim.apply(pred.joints.col(j)) - gt.joints.col(j)).norm();
    }
    return total / static_cast<double>(idx.size());
}

EvalReport evaluate_frames(const std::vector<Pose3D>& pred,
                           const std::vector<Pose3D>& gt, int protocol,
                           const std::vector<int>& subset,
                           std::string fingerprint) {
    if (pred.size() != gt.size()) {
        throw InvalidArgument("evaluate_frames: frame counts differ");
    }
    if (pred.empty()) {
        throw InvalidArgument("evaluate_frames: no frames");
    }
    if (protocol != 1 && protocol != 2) {
        throw InvalidArgument("evaluate_frames: protocol must be 1 or 2");
    }

    const std::vector<int>& idx =
        subset.empty() ? all_joints(pred.front().joint_count()) : subset;
    EvalReport report;
    report.protocol = protocol;
    report.joint_subset_size = static_cast<int>(idx.size());
    report.config_fingerprint = std::move(fingerprint);
    report.per_joint_mm = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(idx.size()));

    for (size_t f = 0; f < pred.size(); ++f) {
        const Pose3D& p = pred[f];
        const Pose3D& g = gt[f];
        check_joint_counts(p, g);
        double frame_err = 0.0;
        if (protocol == 1) {
            const Eigen::Vector3d dp = p.joints.col(0);
            const Eigen::Vector3d dg = g.joints.col(0);
            for (size_t j = 0; j < idx.size(); ++j) {
                const double e = ((p.joints.col(idx[j]) - dp) -
                                  (g.joints.col(idx[j]) - dg))
                                     .norm();
                report.per_joint_mm[static_cast<Eigen::Index>(j)] += e;
                frame_err += e;
            }
        } else {
            const Similarity sim = procrustes_align(p, g, idx);
            for (size_t j = 0; j < idx.size(); ++j) {
                const double e =
                    (sim.apply(p.joints.col(idx[j])) - g.joints.col(idx[j])).norm();
                report.per_joint_mm[static_cast<Eigen::Index>(j)] += e;
                frame_err += e;
            }
        }
        report.per_frame_mm.push_back(frame_err / static_cast<double>(idx.size()));
    }

    report.per_joint_mm /= static_cast<double>(pred.size());
    report.mean_mm =
        std::accumulate(report.per_frame_mm.begin(), report.per_frame_mm.end(), 0.0) /
        static_cast<double>(report.per_frame_mm.size());
    report.median_mm = detail::median(report.per_frame_mm);
    report.sorted_curve = report.per_frame_mm;
    std::sort(report.sorted_curve.begin(), report.sorted_curve.end());
    return report;
}

namespace {

struct CellResult {
    double p1_mean = 0.0;
    double p2_mean = 0.0;
    int failed = 0;
};

CellResult run_cell(const std::vector<Frame>& frames, const CameraRig& rig,
                    const std::vector<int>& camera_subset, const PoseBasis& basis,
                    const LiftConfig& config, bool use_clean, int threads) {
    const RotationGrid grid = RotationGrid::uniform(config.rotation_count);
    CameraRig sub_rig;
    for (int c : camera_subset) {
        sub_rig.cameras.push_back(rig.cameras[static_cast<size_t>(c)]);
    }
    validate_rig(sub_rig);

    const int n = static_cast<int>(frames.size());
    std::vector<double> p1(static_cast<size_t>(n),
                           std::numeric_limits<double>::quiet_NaN());
    std::vector<double> p2(static_cast<size_t>(n),
                           std::numeric_limits<double>::quiet_NaN());
    detail::parallel_for(n, threads, [&](int f) {
        const Frame& frame = frames[static_cast<size_t>(f)];
        MultiViewProblem problem;
        problem.rig = sub_rig;
        problem.basis = basis;
        problem.config = config;
        for (int c : camera_subset) {
            problem.detections.push_back(
                use_clean ? frame.clean[static_cast<size_t>(c)]
                          : frame.corrupted[static_cast<size_t>(c)].pose);
        }
        try {
            const MultiViewLiftResult result = lift_multi(problem, grid);
            p1[static_cast<size_t>(f)] = mpjpe_p1(result.pose, frame.gt_pose);
            p2[static_cast<size_t>(f)] = mpjpe_p2(result.pose, frame.gt_pose);
        } catch (const Error&) {
            // recorded as a failed frame below
        }
    });

    CellResult cell;
    int ok = 0;
    for (int f = 0; f < n; ++f) {
        if (std::isnan(p1[static_cast<size_t>(f)])) {
            ++cell.failed;
            continue;
        }
        cell.p1_mean += p1[static_cast<size_t>(f)];
        cell.p2_mean += p2[static_cast<size_t>(f)];
        ++ok;
    }
    if (ok > 0) {
        cell.p1_mean /= ok;
        cell.p2_mean /= ok;
    }
    return cell;
}

double std_dev(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

FloorReport gt_triangulation_floor(const std::vector<Frame>& frames,
                                   const CameraRig& rig, const PoseBasis& basis,
                                   LiftConfig config, int threads) {
    std::vector<int> cams(static_cast<size_t>(rig.camera_count()));
    std::iota(cams.begin(), cams.end(), 0);
    const CellResult cell = run_cell(frames, rig, cams, basis, config,
                                     /*use_clean=*/true, threads);
    return {cell.p1_mean, cell.p2_mean};
}

std::vector<std::array<int, 2>> right_angle_pairs(const CameraRig& rig) {
    std::vector<std::array<int, 2>> pairs;
    for (int i = 0; i < rig.camera_count(); ++i) {
        for (int j = i + 1; j < rig.camera_count(); ++j) {
            const Eigen::Vector3d fi = rig.cameras[static_cast<size_t>(i)].rotation.row(2);
            const Eigen::Vector3d fj = rig.cameras[static_cast<size_t>(j)].rotation.row(2);
            if (std::abs(fi.dot(fj)) < 1e-6) pairs.push_back({i, j});
        }
    }
    return pairs;
}

AblationTable ablate(const std::vector<Frame>& frames, const CameraRig& rig,
                     const PoseBasis& basis, const LiftConfig& base_config,
                     int threads) {
    if (frames.empty()) throw InvalidArgument("ablate: no frames");
    AblationTable table;
    std::vector<int> full(static_cast<size_t>(rig.camera_count()));
    std::iota(full.begin(), full.end(), 0);
    const auto pairs = right_angle_pairs(rig);

    const std::array<RobustMode, 2> robusts = {RobustMode::Frobenius,
                                               RobustMode::Huber};
    const std::array<RotationMode, 2> rotations = {RotationMode::Argmin,
                                                   RotationMode::Marginalize};
    for (RobustMode robust : robusts) {
        for (RotationMode rotation : rotations) {
            LiftConfig config = base_config;
            config.robust_mode = robust;
            config.rotation_mode = rotation;

            AblationRow row;
            row.robust_mode = robust;
            row.rotation_mode = rotation;
            row.camera_count = rig.camera_count();
            const CellResult cell = run_cell(frames, rig, full, basis, config,
                                             /*use_clean=*/false, threads);
            row.p1_mean = cell.p1_mean;
            row.p2_mean = cell.p2_mean;
            row.failed_frames = cell.failed;
            row.label = std::string(robust == RobustMode::Huber ? "huber" : "frobenius") +
                        (rotation == RotationMode::Marginalize ? " marginalize"
                                                               : " argmin");
            table.rows.push_back(row);

            if (pairs.empty()) continue;
            AblationRow pair_row = row;
            pair_row.camera_count = 2;
            pair_row.label += " 2cam";
            pair_row.failed_frames = 0;
            std::vector<double> p1_means;
            std::vector<double> p2_means;
            for (const auto& pair : pairs) {
                const CellResult two =
                    run_cell(frames, rig, {pair[0], pair[1]}, basis, config,
                             /*use_clean=*/false, threads);
                p1_means.push_back(two.p1_mean);
                p2_means.push_back(two.p2_mean);
                pair_row.failed_frames += two.failed;
            }
            pair_row.p1_mean =
                std::accumulate(p1_means.begin(), p1_means.end(), 0.0) /
                static_cast<double>(p1_means.size());
            pair_row.p2_mean =
                std::accumulate(p2_means.begin(), p2_means.end(), 0.0) /
                static_cast<double>(p2_means.size());
            pair_row.p1_std = std_dev(p1_means, pair_row.p1_mean);
            pair_row.p2_std = std_dev(p2_means, pair_row.p2_mean);
            table.rows.push_back(pair_row);
        }
    }
    return table;
}

}  // namespace mvlift
