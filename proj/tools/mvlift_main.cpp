// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: simulate | fit-basis | lift | evaluate | ablate |
// gradcheck. Every run echoes its resolved configuration (plus an FNV-1a
// fingerprint) into the output directory so results are reproducible from
// the files alone.

#include "CLI11.hpp"

#include "mvlift/detail/numeric.hpp"
#include "mvlift/eval.hpp"
#include "mvlift/io.hpp"
#include "mvlift/lifter_single.hpp"

#include <cinttypes>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace mvlift;

namespace {

struct CommonOpts {
    std::string output_dir = ".";
    std::string config_file;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct ConfigText {
    LiftConfig config;
    std::string text;
    std::string fingerprint;
};

/// Config inputs as parsed: the optional file plus flag overrides in the
/// order given. Resolution order is defaults < file < flags.
struct ConfigCli {
    std::string file;
    std::vector<std::pair<std::string, std::string>> overrides;
};

double parse_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size() || value.empty()) {
        throw InvalidArgument("config: bad value '" + value + "' for " + key);
    }
    return v;
}

void apply_config_line(LiftConfig& config, const std::string& key,
                       const std::string& value) {
    auto bad = [&]() {
        throw InvalidArgument("config: bad value '" + value + "' for " + key);
    };
    if (key == "robust_mode") {
        if (value == "huber") config.robust_mode = RobustMode::Huber;
        else if (value == "frobenius") config.robust_mode = RobustMode::Frobenius;
        else bad();
    } else if (key == "rotation_mode") {
        if (value == "marginalize") config.rotation_mode = RotationMode::Marginalize;
        else if (value == "argmin") config.rotation_mode = RotationMode::Argmin;
        else bad();
    } else if (key == "lambda") {
        config.lambda = parse_double(key, value);
    } else if (key == "rho") {
        config.rho = parse_double(key, value);
    } else if (key == "rho_mode") {
        if (value == "adaptive") config.rho_mode = RhoMode::Adaptive;
        else if (value == "fixed") config.rho_mode = RhoMode::Fixed;
        else bad();
    } else if (key == "epsilon") {
        config.huber_epsilon = parse_double(key, value);
    } else if (key == "epsilon_mode") {
        if (value == "adaptive") config.epsilon_mode = EpsilonMode::Adaptive;
        else if (value == "fixed") config.epsilon_mode = EpsilonMode::Fixed;
        else bad();
    } else if (key == "irls_iterations") {
        config.irls_iterations = static_cast<int>(parse_double(key, value));
    } else if (key == "rotations") {
        config.rotation_count = static_cast<int>(parse_double(key, value));
    } else if (key == "exact_coefficient_penalty") {
        config.exact_coefficient_penalty = value == "1" || value == "true";
    } else {
        throw InvalidArgument("config: unknown key '" + key + "'");
    }
}

void load_config_file(LiftConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open config file");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        const size_t colon = line.find(':');
        if (colon == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": expected 'key: value'");
        }
        std::string key = line.substr(start, colon - start);
        std::string value = line.substr(colon + 1);
        const size_t vs = value.find_first_not_of(" \t");
        value = vs == std::string::npos ? "" : value.substr(vs);
        const size_t ve = value.find_last_not_of(" \t\r");
        if (ve != std::string::npos) value = value.substr(0, ve + 1);
        apply_config_line(config, key, value);
    }
}

std::string render_config(const LiftConfig& c, const CommonOpts& opts) {
    std::string s;
    s += "robust_mode: " +
         std::string(c.robust_mode == RobustMode::Huber ? "huber" : "frobenius") + "\n";
    s += "rotation_mode: " +
         std::string(c.rotation_mode == RotationMode::Marginalize ? "marginalize"
                                                                  : "argmin") +
         "\n";
    s += "lambda: " + format_g17(c.lambda) + "\n";
    s += "rho: " + format_g17(c.rho) + "\n";
    s += "rho_mode: " +
         std::string(c.rho_mode == RhoMode::Adaptive ? "adaptive" : "fixed") + "\n";
    s += "epsilon: " + format_g17(c.huber_epsilon) + "\n";
    s += "epsilon_mode: " +
         std::string(c.epsilon_mode == EpsilonMode::Adaptive ? "adaptive" : "fixed") +
         "\n";
    s += "irls_iterations: " + std::to_string(c.irls_iterations) + "\n";
    s += "rotations: " + std::to_string(c.rotation_count) + "\n";
    s += "exact_coefficient_penalty: " +
         std::string(c.exact_coefficient_penalty ? "1" : "0") + "\n";
    s += "seed: " + std::to_string(opts.seed) + "\n";
    s += "threads: " + std::to_string(opts.threads) + "\n";
    return s;
}

std::string to_hex(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
    return buf;
}

/// Writes config.txt (resolved settings + fingerprint) next to the outputs.
ConfigText emit_config(const LiftConfig& config, const CommonOpts& opts) {
    ConfigText out;
    out.config = config;
    out.text = render_config(config, opts);
    out.fingerprint = to_hex(detail::fnv1a(out.text));
    fs::create_directories(opts.output_dir);
    std::ofstream f(fs::path(opts.output_dir) / "config.txt");
    f << out.text << "fingerprint: " << out.fingerprint << "\n";
    return out;
}

void add_config_flags(CLI::App* cmd, ConfigCli& cli, CommonOpts& opts) {
    cmd->add_option("--config", cli.file, "config file (key: value lines)");
    cmd->add_option("--output-dir", opts.output_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "random seed");
    cmd->add_option("--threads", opts.threads, "worker thread cap")
        ->check(CLI::PositiveNumber);
    auto record = [&cli](const char* key) {
        return [&cli, key](const std::string& v) { cli.overrides.emplace_back(key, v); };
    };
    cmd->add_option_function<std::string>("--robust", record("robust_mode"),
                                          "huber|frobenius");
    cmd->add_option_function<std::string>("--rotation-mode", record("rotation_mode"),
                                          "marginalize|argmin");
    cmd->add_option_function<std::string>("--lambda", record("lambda"),
                                          "data-term weight");
    cmd->add_option_function<std::string>("--rho", record("rho"),
                                          "marginalization temperature");
    cmd->add_option_function<std::string>("--rho-mode", record("rho_mode"),
                                          "adaptive|fixed");
    cmd->add_option_function<std::string>("--epsilon", record("epsilon"),
                                          "Huber knee (fixed mode)");
    cmd->add_option_function<std::string>("--epsilon-mode", record("epsilon_mode"),
                                          "adaptive|fixed");
    cmd->add_option_function<std::string>("--irls-iterations",
                                          record("irls_iterations"),
                                          "IRLS solve count");
    cmd->add_option_function<std::string>("--rotations", record("rotations"),
                                          "rotation grid size");
}

/// defaults < config file < flags, applied after the parse completes.
LiftConfig resolve_config(const ConfigCli& cli) {
    LiftConfig config;
    if (!cli.file.empty()) load_config_file(config, cli.file);
    for (const auto& [key, value] : cli.overrides) {
        apply_config_line(config, key, value);
    }
    return config;
}

void joints_to_subset(int joints, int joint_count, std::vector<int>& subset) {
    if (joints == 14) {
        if (joint_count != 17) {
            throw InvalidArgument("--joints 14 requires the 17-joint skeleton");
        }
        subset = subset14();
    } else if (joints == 17 || joints == 0) {
        subset.clear();
    } else {
        throw InvalidArgument("--joints must be 14 or 17");
    }
}

// ---------------------------------------------------------------- commands

int cmd_fit_basis(const std::string& corpus_path, int basis_size,
                  std::string output, bool no_normalize, CommonOpts& opts) {
    const PosesFile file = read_poses(corpus_path);
    PoseCorpus corpus{std::vector<Pose3D>(file.poses)};
    FitOptions fit_opts;
    fit_opts.normalize = !no_normalize;
    const PoseBasis basis = fit_basis(corpus, basis_size, fit_opts);
    fs::create_directories(opts.output_dir);
    if (output.empty()) output = (fs::path(opts.output_dir) / "basis.txt").string();
    write_basis(output, basis, file.joint_names);
    emit_config(LiftConfig{}, opts);
    std::cout << "fit " << basis.size() << " components from " << corpus.count()
              << " poses; sigma range [" << format_g17(basis.sigmas.minCoeff())
              << ", " << format_g17(basis.sigmas.maxCoeff()) << "]\n"
              << "wrote " << output << "\n";
    return 0;
}

int cmd_simulate(const std::string& scene_path, int frames_override,
                 bool seed_given, CommonOpts& opts) {
    SceneFile scene = read_scene(scene_path);
    if (frames_override > 0) scene.frames = frames_override;
    if (seed_given) scene.spec.seed = opts.seed;
    if (scene.frames <= 0) throw InvalidArgument("simulate: frame count not set");

    const std::vector<Frame> frames = generate(scene.spec, scene.frames);
    const CameraRig rig = make_rig(scene.spec.rig);
    std::vector<std::string> names;
    if (scene.spec.subject.basis.joint_count() == 17) {
        names = skeleton17().joint_names;
    } else {
        for (int j = 0; j < scene.spec.subject.basis.joint_count(); ++j) {
            names.push_back("j" + std::to_string(j));
        }
    }
    fs::create_directories(opts.output_dir);
    write_bundle(opts.output_dir, frames, rig, scene.spec.subject.basis, names);
    write_scene((fs::path(opts.output_dir) / "scene.txt").string(), scene);
    opts.seed = scene.spec.seed;
    emit_config(LiftConfig{}, opts);
    std::cout << "simulated " << frames.size() << " frames, " << rig.camera_count()
              << " cameras -> " << opts.output_dir << "\n";
    return 0;
}

int cmd_lift(const std::string& detections_path, const std::string& calibration_path,
             const std::string& basis_path, int views, bool center_on_root,
             LiftConfig& config, CommonOpts& opts) {
    config.validate();
    const DetectionsFile det = read_detections(detections_path);
    CameraRig rig = read_calibration(calibration_path);
    const PoseBasis basis = read_basis(basis_path);
    if (static_cast<size_t>(rig.camera_count()) != det.camera_labels.size()) {
        throw InvalidArgument("lift: calibration/detections camera count mismatch");
    }
    if (views > 0 && views < rig.camera_count()) {
        rig.cameras.resize(static_cast<size_t>(views));
    }
    const int cams = rig.camera_count();
    const RotationGrid grid = RotationGrid::uniform(config.rotation_count);

    const ConfigText cfg = emit_config(config, opts);
    const int n = static_cast<int>(det.frames.size());
    PosesFile out;
    out.joint_names = det.joint_names;
    out.poses.assign(static_cast<size_t>(n), Pose3D::zero(basis.joint_count()));
    out.scales.assign(static_cast<size_t>(n), std::numeric_limits<double>::quiet_NaN());
    out.angles.assign(static_cast<size_t>(n), std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> diag(static_cast<size_t>(n));
    std::vector<std::string> errors(static_cast<size_t>(n));

    detail::parallel_for(n, opts.threads, [&](int f) {
        std::vector<Pose2D> frame_det;
        for (int c = 0; c < cams; ++c) {
            Pose2D pose =
                det.frames[static_cast<size_t>(f)][static_cast<size_t>(c)].pose;
            if (center_on_root && pose.visible(0)) {
                pose.joints.colwise() -= Eigen::Vector2d(pose.joints.col(0));
            }
            frame_det.push_back(std::move(pose));
        }
        try {
            if (cams == 1) {
                const LiftResult result =
                    lift_single(frame_det[0], rig.cameras[0], basis, grid, config);
                const RotationSolution& best =
                    result.per_rotation[static_cast<size_t>(result.argmin_index)];
                out.poses[static_cast<size_t>(f)] = result.pose;
                out.scales[static_cast<size_t>(f)] = best.scale;
                out.angles[static_cast<size_t>(f)] = best.angle;
                diag[static_cast<size_t>(f)] =
                    "frame " + std::to_string(f) + ": views=1 angle=" +
                    format_g17(best.angle) + " cost=" + format_g17(best.cost) +
                    " scale=" + format_g17(best.scale);
            } else {
                MultiViewProblem problem{frame_det, rig, basis, config};
                const MultiViewLiftResult result = lift_multi(problem, grid);
                const WarpSolution& best =
                    result.per_rotation[static_cast<size_t>(result.argmin_index)];
                out.poses[static_cast<size_t>(f)] = result.pose;
                out.scales[static_cast<size_t>(f)] = best.scale;
                out.angles[static_cast<size_t>(f)] = best.angle;
                std::string trace;
                for (double v : best.objective_trace) trace += " " + format_g17(v);
                diag[static_cast<size_t>(f)] =
                    "frame " + std::to_string(f) + ": views=" + std::to_string(cams) +
                    " angle=" + format_g17(best.angle) + " cost=" +
                    format_g17(best.cost) + " scale=" + format_g17(best.scale) +
                    " epsilon=" + format_g17(best.epsilon) + " trace" + trace;
            }
        } catch (const Error& err) {
            errors[static_cast<size_t>(f)] = err.what();
            diag[static_cast<size_t>(f)] =
                "frame " + std::to_string(f) + ": FAILED " + err.what();
        }
    });

    int failed = 0;
    for (const auto& e : errors) failed += !e.empty();

    const fs::path dir(opts.output_dir);
    write_poses((dir / "poses.txt").string(), out);
    std::ofstream dfile(dir / "diagnostics.txt");
    dfile << "# one line per frame; fingerprint " << cfg.fingerprint << "\n";
    for (const auto& d : diag) dfile << d << "\n";
    std::cout << "lifted " << (n - failed) << "/" << n << " frames -> "
              << (dir / "poses.txt").string() << "\n";
    if (failed > 0) {
        std::cout << failed << " frames failed (see diagnostics.txt)\n";
        return 3;
    }
    return 0;
}

int cmd_evaluate(const std::string& poses_path, const std::string& gt_path,
                 int protocol, int joints, int stride, CommonOpts& opts) {
    const PosesFile pred = read_poses(poses_path);
    const PosesFile gt = read_poses(gt_path);
    if (pred.poses.size() != gt.poses.size()) {
        throw InvalidArgument("evaluate: pose/gt frame counts differ");
    }
    if (stride < 1) throw InvalidArgument("evaluate: stride must be >= 1");
    std::vector<Pose3D> p, g;
    for (size_t f = 0; f < pred.poses.size(); f += static_cast<size_t>(stride)) {
        p.push_back(pred.poses[f]);
        g.push_back(gt.poses[f]);
    }
    std::vector<int> subset;
    joints_to_subset(joints, p.front().joint_count(), subset);

    const ConfigText cfg = emit_config(LiftConfig{}, opts);
    const EvalReport report = evaluate_frames(p, g, protocol, subset, cfg.fingerprint);
    write_report((fs::path(opts.output_dir) / "report.txt").string(), report);
    std::cout << "protocol " << protocol << " (" << report.joint_subset_size
              << " joints, " << report.per_frame_mm.size() << " frames): mean "
              << format_g17(report.mean_mm) << " mm, median "
              << format_g17(report.median_mm) << " mm\n";
    return 0;
}

int cmd_ablate(const std::string& bundle_dir, LiftConfig& config, CommonOpts& opts) {
    config.validate();
    const Bundle bundle = read_bundle(bundle_dir);
    if (!bundle.has_gt) throw InvalidArgument("ablate: bundle has no ground truth");
    const std::vector<Frame> frames = frames_from_bundle(bundle);
    emit_config(config, opts);
    const AblationTable table =
        ablate(frames, bundle.rig, bundle.basis, config, opts.threads);
    write_ablation((fs::path(opts.output_dir) / "ablation.txt").string(), table);

    std::cout << "formulation                       P1 (mm)            P2 (mm)\n";
    for (const AblationRow& row : table.rows) {
        char line[160];
        if (row.camera_count == 2) {
            std::snprintf(line, sizeof(line),
                          "%-32s  %7.2f +/- %-5.2f  %7.2f +/- %-5.2f",
                          row.label.c_str(), row.p1_mean, row.p1_std, row.p2_mean,
                          row.p2_std);
        } else {
            std::snprintf(line, sizeof(line), "%-32s  %7.2f            %7.2f",
                          row.label.c_str(), row.p1_mean, row.p2_mean);
        }
        std::cout << line << "\n";
    }
    return 0;
}

int cmd_gradcheck(const std::string& bundle_dir, int frame, double angle_deg,
                  double step, double tolerance, LiftConfig& config,
                  CommonOpts& opts) {
    config.validate();
    const Bundle bundle = read_bundle(bundle_dir);
    if (frame < 0 || frame >= static_cast<int>(bundle.detections.frames.size())) {
        throw InvalidArgument("gradcheck: frame index out of range");
    }
    MultiViewProblem problem;
    problem.rig = bundle.rig;
    problem.basis = bundle.basis;
    problem.config = config;
    for (const Detections2D& d : bundle.detections.frames[static_cast<size_t>(frame)]) {
        problem.detections.push_back(d.pose);
    }
    const double angle = angle_deg * M_PI / 180.0;

    // Pin an adaptive knee so the finite differences see a fixed objective.
    if (problem.config.robust_mode == RobustMode::Huber &&
        problem.config.epsilon_mode == EpsilonMode::Adaptive) {
        const WarpSolution probe = warp_huber(problem, angle);
        problem.config.epsilon_mode = EpsilonMode::Fixed;
        problem.config.huber_epsilon = probe.epsilon;
    }
    if (tolerance <= 0.0) {
        tolerance = problem.config.robust_mode == RobustMode::Huber ? 1e-4 : 1e-6;
    }

    const Eigen::MatrixXd jac = lift_jacobian(problem, angle);
    const Eigen::MatrixXd ref = lift_jacobian_fd(problem, angle, step);
    const double scale = std::max(ref.cwiseAbs().maxCoeff(), 1e-12);
    const double rel = (jac - ref).cwiseAbs().maxCoeff() / scale;

    emit_config(problem.config, opts);
    std::ofstream out(fs::path(opts.output_dir) / "gradcheck.txt");
    out << "frame: " << frame << "\nangle_deg: " << format_g17(angle_deg)
        << "\nstep: " << format_g17(step)
        << "\nmax_abs_jacobian: " << format_g17(jac.cwiseAbs().maxCoeff())
        << "\nmax_rel_error: " << format_g17(rel)
        << "\ntolerance: " << format_g17(tolerance) << "\n";
    std::cout << "max relative error " << format_g17(rel) << " (tolerance "
              << format_g17(tolerance) << ")\n";
    if (!(rel <= tolerance)) {
        std::cerr << "gradcheck: tolerance exceeded\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-view 3D human pose lifting"};
    app.require_subcommand(1);

    CommonOpts opts;
    ConfigCli config_cli;

    auto* fit = app.add_subcommand("fit-basis", "fit a pose basis from a 3D corpus");
    std::string corpus_path, basis_out;
    int basis_size = 10;
    bool no_normalize = false;
    fit->add_option("--corpus", corpus_path, "poses3d corpus file")->required();
    fit->add_option("--basis-size", basis_size, "component count");
    fit->add_option("--output", basis_out, "basis output path");
    fit->add_flag("--no-normalize", no_normalize,
                  "corpus is already centered, aligned and scaled");
    fit->add_option("--output-dir", opts.output_dir, "output directory");

    auto* sim = app.add_subcommand("simulate", "generate a synthetic frame bundle");
    std::string scene_path;
    int frames_override = 0;
    sim->add_option("--scene", scene_path, "scene spec file")->required();
    sim->add_option("--frames", frames_override, "frame count override");
    auto* sim_seed = sim->add_option("--seed", opts.seed, "seed override");
    sim->add_option("--output-dir", opts.output_dir, "output directory");

    auto* lift = app.add_subcommand("lift", "reconstruct 3D poses from detections");
    std::string det_path, calib_path, basis_path;
    int views = 0;
    bool center_on_root = false;
    lift->add_option("--detections", det_path, "detections file")->required();
    lift->add_option("--calibration", calib_path, "calibration file")->required();
    lift->add_option("--basis", basis_path, "basis file")->required();
    lift->add_option("--views", views, "use only the first N cameras (1 = single-view)");
    lift->add_flag("--center-on-root", center_on_root,
                   "subtract the root detection per camera before lifting");
    add_config_flags(lift, config_cli, opts);

    auto* eval_cmd = app.add_subcommand("evaluate", "score poses against ground truth");
    std::string poses_path, gt_path;
    int protocol = 1, joints = 17, stride = 1;
    eval_cmd->add_option("--poses", poses_path, "predicted poses file")->required();
    eval_cmd->add_option("--gt", gt_path, "ground-truth poses file")->required();
    eval_cmd->add_option("--protocol", protocol, "1 = unaligned, 2 = Procrustes")
        ->check(CLI::Range(1, 2));
    eval_cmd->add_option("--joints", joints, "14 or 17");
    eval_cmd->add_option("--stride", stride, "evaluate every Nth frame");
    eval_cmd->add_option("--output-dir", opts.output_dir, "output directory");
    eval_cmd->add_option("--seed", opts.seed, "recorded in the fingerprint");

    auto* abl = app.add_subcommand("ablate", "robustness/averaging/camera ablation");
    std::string bundle_dir;
    abl->add_option("--bundle", bundle_dir, "simulated bundle directory")->required();
    add_config_flags(abl, config_cli, opts);

    auto* grad = app.add_subcommand("gradcheck", "Jacobian vs finite differences");
    std::string grad_bundle;
    int grad_frame = 0;
    double angle_deg = 0.0, fd_step = 1e-3, tolerance = 0.0;
    grad->add_option("--bundle", grad_bundle, "simulated bundle directory")->required();
    grad->add_option("--frame", grad_frame, "frame index");
    grad->add_option("--angle", angle_deg, "ground-plane angle in degrees");
    grad->add_option("--step", fd_step, "finite-difference step (pixels)");
    grad->add_option("--tolerance", tolerance,
                     "max relative error (default 1e-6 quadratic, 1e-4 robust)");
    add_config_flags(grad, config_cli, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (fit->parsed()) {
            return cmd_fit_basis(corpus_path, basis_size, basis_out, no_normalize,
                                 opts);
        }
        if (sim->parsed()) {
            return cmd_simulate(scene_path, frames_override, sim_seed->count() > 0,
                                opts);
        }
        if (lift->parsed()) {
            LiftConfig config = resolve_config(config_cli);
            return cmd_lift(det_path, calib_path, basis_path, views, center_on_root,
                            config, opts);
        }
        if (eval_cmd->parsed()) {
            return cmd_evaluate(poses_path, gt_path, protocol, joints, stride, opts);
        }
        if (abl->parsed()) {
            LiftConfig config = resolve_config(config_cli);
            return cmd_ablate(bundle_dir, config, opts);
        }
        if (grad->parsed()) {
            LiftConfig config = resolve_config(config_cli);
            return cmd_gradcheck(grad_bundle, grad_frame, angle_deg, fd_step,
                                 tolerance, config, opts);
        }
    } catch (const DegenerateSystem& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const AllRotationsDegenerate& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const RankDeficient& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const DegeneratePose& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateAlignment& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateExtents& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
