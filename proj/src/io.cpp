// SPDX-License-Identifier: Apache-2.0
#include "mvlift/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace mvlift {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

class Reader {
  public:
    explicit Reader(const std::string& path) : path_(path), in_(path) {
        if (!in_) throw ParseError(path + ": cannot open");
    }

    /// Next non-blank, non-comment line; false at end of file.
    bool next(std::string& out) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            size_t i = line.find_first_not_of(" \t");
            if (i == std::string::npos || line[i] == '#') continue;
            out = line;
            return true;
        }
        return false;
    }

    std::string require(const char* what) {
        std::string line;
        if (!next(line)) fail(std::string("unexpected end of file, wanted ") + what);
        return line;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(path_ + ":" + std::to_string(line_no_) + ": " + msg);
    }

    double to_double(const std::string& tok) const {
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size()) fail("bad number '" + tok + "'");
        return v;
    }

    long long to_int(const std::string& tok) const {
        char* end = nullptr;
        const long long v = std::strtoll(tok.c_str(), &end, 10);
        if (end != tok.c_str() + tok.size()) fail("bad integer '" + tok + "'");
        return v;
    }

    /// Parses "key: rest"; fails when the key does not match.
    std::string field(const char* key) {
        const std::string line = require(key);
        return field_of(line, key);
    }

    std::string field_of(const std::string& line, const char* key) const {
        const std::string prefix = std::string(key) + ":";
        if (line.rfind(prefix, 0) != 0) {
            fail("expected '" + prefix + " ...', got '" + line + "'");
        }
        std::string rest = line.substr(prefix.size());
        const size_t i = rest.find_first_not_of(" \t");
        return i == std::string::npos ? std::string() : rest.substr(i);
    }

    void expect_header(const char* kind) {
        const std::string line = require("header");
        const auto toks = split_ws(line);
        if (toks.size() != 2 || toks[0] != std::string("mvlift-") + kind) {
            fail(std::string("expected 'mvlift-") + kind + " v1' header");
        }
        if (toks[1] != "v1") {
            throw VersionMismatch(path_ + ": unsupported version '" + toks[1] + "'");
        }
    }

    int line_no() const { return line_no_; }

  private:
    std::string path_;
    std::ifstream in_;
    int line_no_ = 0;
};

class Writer {
  public:
    explicit Writer(const std::string& path) : path_(path), out_(path) {
        if (!out_) throw ParseError(path + ": cannot open for writing");
    }
    ~Writer() { out_.flush(); }

    void line(const std::string& s) { out_ << s << '\n'; }

    template <typename... Parts>
    void fields(const Parts&... parts) {
        bool first = true;
        ((out_ << (first ? "" : " ") << parts, first = false), ...);
        out_ << '\n';
    }

  private:
    std::string path_;
    std::ofstream out_;
};

// Joint-name policy: the canonical 17 names map (in any order) onto the
// library order; synthetic names j<digits> are accepted verbatim for other
// skeletons; anything else is unknown.
bool is_synthetic_name(const std::string& name) {
    if (name.size() < 2 || name[0] != 'j') return false;
    for (size_t i = 1; i < name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) return false;
    }
    return true;
}

/// permutation[file_index] = output index; identity for synthetic names.
std::vector<int> joint_permutation(const std::vector<std::string>& names,
                                   std::vector<std::string>& out_names) {
    const Skeleton& canon = skeleton17();
    std::unordered_set<std::string> seen;
    for (const auto& n : names) {
        if (!seen.insert(n).second) {
            throw ParseError("duplicate joint name '" + n + "'");
        }
    }
    bool all_canonical = names.size() == canon.joint_names.size();
    for (const auto& n : names) {
        if (canon.index_of(n) < 0) {
            all_canonical = false;
            break;
        }
    }
    std::vector<int> perm(names.size());
    if (all_canonical) {
        for (size_t i = 0; i < names.size(); ++i) {
            perm[i] = canon.index_of(names[i]);
        }
        out_names = canon.joint_names;
        return perm;
    }
    for (const auto& n : names) {
        if (canon.index_of(n) < 0 && !is_synthetic_name(n)) {
            throw JointOrderUnknown("unknown joint name '" + n + "'");
        }
    }
    for (size_t i = 0; i < names.size(); ++i) perm[i] = static_cast<int>(i);
    out_names = names;
    return perm;
}

std::vector<std::string> read_name_list(Reader& r, const char* key) {
    const auto toks = split_ws(r.field(key));
    if (toks.empty()) r.fail(std::string(key) + ": empty list");
    const int count = static_cast<int>(r.to_int(toks[0]));
    if (count != static_cast<int>(toks.size()) - 1) {
        r.fail(std::string(key) + ": count does not match list");
    }
    return {toks.begin() + 1, toks.end()};
}

void write_name_list(Writer& w, const char* key,
                     const std::vector<std::string>& names) {
    std::string line = std::string(key) + ": " + std::to_string(names.size());
    for (const auto& n : names) line += " " + n;
    w.line(line);
}

Eigen::Matrix3Xd read_xyz_block(Reader& r, int joints) {
    Eigen::Matrix3Xd m(3, joints);
    for (int p = 0; p < joints; ++p) {
        const auto toks = split_ws(r.require("x y z line"));
        if (toks.size() != 3) r.fail("expected 3 values");
        for (int a = 0; a < 3; ++a) m(a, p) = r.to_double(toks[static_cast<size_t>(a)]);
    }
    return m;
}

void write_xyz_block(Writer& w, const Eigen::Matrix3Xd& m) {
    for (int p = 0; p < m.cols(); ++p) {
        w.fields(format_g17(m(0, p)), format_g17(m(1, p)), format_g17(m(2, p)));
    }
}

template <typename T>
std::vector<T> permute(const std::vector<T>& in, const std::vector<int>& perm) {
    std::vector<T> out(in.size());
    for (size_t i = 0; i < in.size(); ++i) out[static_cast<size_t>(perm[i])] = in[i];
    return out;
}

Eigen::Matrix3Xd permute_cols(const Eigen::Matrix3Xd& m, const std::vector<int>& perm) {
    Eigen::Matrix3Xd out(3, m.cols());
    for (int i = 0; i < m.cols(); ++i) out.col(perm[static_cast<size_t>(i)]) = m.col(i);
    return out;
}

Eigen::Matrix2Xd permute_cols(const Eigen::Matrix2Xd& m, const std::vector<int>& perm) {
    Eigen::Matrix2Xd out(2, m.cols());
    for (int i = 0; i < m.cols(); ++i) out.col(perm[static_cast<size_t>(i)]) = m.col(i);
    return out;
}

}  // namespace

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_calibration(const std::string& path, const CameraRig& rig) {
    Writer w(path);
    w.line("mvlift-calibration v1");
    w.line("cameras: " + std::to_string(rig.camera_count()));
    for (const Camera& cam : rig.cameras) {
        w.line("camera: " + cam.label);
        std::string rot = "rotation:";
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) rot += " " + format_g17(cam.rotation(i, j));
        }
        w.line(rot);
        w.line("translation: " + format_g17(cam.translation.x()) + " " +
               format_g17(cam.translation.y()) + " " + format_g17(cam.translation.z()));
    }
}

CameraRig read_calibration(const std::string& path) {
    Reader r(path);
    r.expect_header("calibration");
    const int count = static_cast<int>(r.to_int(r.field("cameras")));
    std::vector<Camera> cams;
    for (int c = 0; c < count; ++c) {
        const std::string label = r.field("camera");
        const auto rot_toks = split_ws(r.field("rotation"));
        if (rot_toks.size() != 9) r.fail("rotation needs 9 values");
        Eigen::Matrix3d rot;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                rot(i, j) = r.to_double(rot_toks[static_cast<size_t>(3 * i + j)]);
            }
        }
        const auto t_toks = split_ws(r.field("translation"));
        if (t_toks.size() != 3) r.fail("translation needs 3 values");
        const Eigen::Vector3d t(r.to_double(t_toks[0]), r.to_double(t_toks[1]),
                                r.to_double(t_toks[2]));
        cams.emplace_back(rot, t, label);
    }
    return CameraRig(std::move(cams));
}

void write_detections(const std::string& path, const DetectionsFile& file) {
    Writer w(path);
    w.line("mvlift-detections v1");
    write_name_list(w, "joints", file.joint_names);
    write_name_list(w, "cameras", file.camera_labels);
    w.line("frames: " + std::to_string(file.frames.size()));
    for (size_t f = 0; f < file.frames.size(); ++f) {
        w.line("frame: " + std::to_string(f));
        for (size_t c = 0; c < file.camera_labels.size(); ++c) {
            w.line("view: " + file.camera_labels[c]);
            const Detections2D& det = file.frames[f][c];
            for (int p = 0; p < det.pose.joint_count(); ++p) {
                w.fields(format_g17(det.pose.joints(0, p)),
                         format_g17(det.pose.joints(1, p)),
                         format_g17(det.confidence_of(p)),
                         det.pose.visible(p) ? 1 : 0);
            }
        }
    }
}

DetectionsFile read_detections(const std::string& path) {
    Reader r(path);
    r.expect_header("detections");
    DetectionsFile file;
    const auto raw_names = read_name_list(r, "joints");
    const auto perm = joint_permutation(raw_names, file.joint_names);
    file.camera_labels = read_name_list(r, "cameras");
    const int joints = static_cast<int>(raw_names.size());
    const int frames = static_cast<int>(r.to_int(r.field("frames")));
    for (int f = 0; f < frames; ++f) {
        const int idx = static_cast<int>(r.to_int(r.field("frame")));
        if (idx != f) r.fail("frame indices must be consecutive from 0");
        std::vector<Detections2D> views;
        for (const auto& label : file.camera_labels) {
            const std::string got = r.field("view");
            if (got != label) r.fail("expected view " + label);
            Eigen::Matrix2Xd pts(2, joints);
            Eigen::VectorXd conf(joints);
            std::vector<std::uint8_t> vis(static_cast<size_t>(joints), 1);
            for (int p = 0; p < joints; ++p) {
                const auto toks = split_ws(r.require("u v conf vis line"));
                if (toks.size() != 4) r.fail("expected 4 values");
                pts(0, p) = r.to_double(toks[0]);
                pts(1, p) = r.to_double(toks[1]);
                conf[p] = r.to_double(toks[2]);
                vis[static_cast<size_t>(p)] =
                    static_cast<std::uint8_t>(r.to_int(toks[3]) != 0);
            }
            Detections2D det;
            det.pose = Pose2D(permute_cols(Eigen::Matrix2Xd(pts), perm),
                              permute(vis, perm));
            Eigen::VectorXd conf_p(joints);
            for (int p = 0; p < joints; ++p) conf_p[perm[static_cast<size_t>(p)]] = conf[p];
            det.confidence = std::move(conf_p);
            views.push_back(std::move(det));
        }
        file.frames.push_back(std::move(views));
    }
    return file;
}

void write_poses(const std::string& path, const PosesFile& file) {
    Writer w(path);
    w.line("mvlift-poses3d v1");
    write_name_list(w, "joints", file.joint_names);
    w.line("frames: " + std::to_string(file.poses.size()));
    for (size_t f = 0; f < file.poses.size(); ++f) {
        w.line("frame: " + std::to_string(f));
        if (f < file.scales.size() && std::isfinite(file.scales[f])) {
            w.line("scale: " + format_g17(file.scales[f]));
        }
        if (f < file.angles.size() && std::isfinite(file.angles[f])) {
            w.line("angle: " + format_g17(file.angles[f]));
        }
        write_xyz_block(w, file.poses[f].joints);
        if (f < file.ledgers.size()) {
            for (const JointCorruption& c : file.ledgers[f]) {
                w.fields("corrupt:", c.camera,
                         file.joint_names[static_cast<size_t>(c.joint)],
                         c.kind == JointCorruption::Kind::Outlier ? "outlier"
                                                                  : "missing");
            }
        }
    }
}

PosesFile read_poses(const std::string& path) {
    Reader r(path);
    r.expect_header("poses3d");
    PosesFile file;
    const auto raw_names = read_name_list(r, "joints");
    const auto perm = joint_permutation(raw_names, file.joint_names);
    const int joints = static_cast<int>(raw_names.size());
    const int frames = static_cast<int>(r.to_int(r.field("frames")));

    std::string line;
    bool pending = r.next(line);
    for (int f = 0; f < frames; ++f) {
        if (!pending) r.fail("unexpected end of file");
        if (static_cast<int>(r.to_int(r.field_of(line, "frame"))) != f) {
            r.fail("frame indices must be consecutive from 0");
        }
        double scale = std::numeric_limits<double>::quiet_NaN();
        double angle = std::numeric_limits<double>::quiet_NaN();
        pending = r.next(line);
        if (pending && line.rfind("scale:", 0) == 0) {
            scale = r.to_double(r.field_of(line, "scale"));
            pending = r.next(line);
        }
        if (pending && line.rfind("angle:", 0) == 0) {
            angle = r.to_double(r.field_of(line, "angle"));
            pending = r.next(line);
        }
        Eigen::Matrix3Xd m(3, joints);
        for (int p = 0; p < joints; ++p) {
            if (!pending) r.fail("pose line missing");
            const auto toks = split_ws(line);
            if (toks.size() != 3) r.fail("expected 3 values");
            for (int a = 0; a < 3; ++a) {
                m(a, p) = r.to_double(toks[static_cast<size_t>(a)]);
            }
            pending = r.next(line);
        }
        std::vector<JointCorruption> ledger;
        while (pending && line.rfind("corrupt:", 0) == 0) {
            const auto toks = split_ws(r.field_of(line, "corrupt"));
            if (toks.size() != 3) r.fail("corrupt needs camera, joint, kind");
            JointCorruption c;
            c.camera = static_cast<int>(r.to_int(toks[0]));
            bool found = false;
            for (size_t j = 0; j < raw_names.size(); ++j) {
                if (raw_names[j] == toks[1]) {
                    c.joint = perm[j];
                    found = true;
                    break;
                }
            }
            if (!found) throw JointOrderUnknown("unknown joint name '" + toks[1] + "'");
            if (toks[2] == "outlier") {
                c.kind = JointCorruption::Kind::Outlier;
            } else if (toks[2] == "missing") {
                c.kind = JointCorruption::Kind::Missing;
            } else {
                r.fail("corrupt kind must be outlier or missing");
            }
            ledger.push_back(c);
            pending = r.next(line);
        }
        file.poses.emplace_back(permute_cols(m, perm));
        file.scales.push_back(scale);
        file.angles.push_back(angle);
        file.ledgers.push_back(std::move(ledger));
    }
    return file;
}

void write_basis(const std::string& path, const PoseBasis& basis,
                 const std::vector<std::string>& joint_names) {
    if (static_cast<int>(joint_names.size()) != basis.joint_count()) {
        throw InvalidArgument("write_basis: joint name count mismatch");
    }
    Writer w(path);
    w.line("mvlift-basis v1");
    write_name_list(w, "joints", joint_names);
    w.line("size: " + std::to_string(basis.size()));
    std::string sig = "sigmas:";
    for (int i = 0; i < basis.size(); ++i) sig += " " + format_g17(basis.sigmas[i]);
    w.line(sig);
    w.line("mean:");
    write_xyz_block(w, basis.mean.joints);
    for (int i = 0; i < basis.size(); ++i) {
        w.line("component: " + std::to_string(i));
        write_xyz_block(w, basis.components[static_cast<size_t>(i)]);
    }
}

PoseBasis read_basis(const std::string& path) {
    Reader r(path);
    r.expect_header("basis");
    std::vector<std::string> names;
    const auto raw_names = read_name_list(r, "joints");
    const auto perm = joint_permutation(raw_names, names);
    const int joints = static_cast<int>(raw_names.size());
    const int size = static_cast<int>(r.to_int(r.field("size")));
    const auto sig_toks = split_ws(r.field("sigmas"));
    if (static_cast<int>(sig_toks.size()) != size) r.fail("sigma count mismatch");
    Eigen::VectorXd sigmas(size);
    for (int i = 0; i < size; ++i) sigmas[i] = r.to_double(sig_toks[static_cast<size_t>(i)]);
    if (r.field("mean") != "") r.fail("mean takes no inline value");
    const Eigen::Matrix3Xd mean = permute_cols(read_xyz_block(r, joints), perm);
    std::vector<Eigen::Matrix3Xd> comps;
    for (int i = 0; i < size; ++i) {
        if (static_cast<int>(r.to_int(r.field("component"))) != i) {
            r.fail("components must be consecutive from 0");
        }
        comps.push_back(permute_cols(read_xyz_block(r, joints), perm));
    }
    return PoseBasis(Pose3D(mean), std::move(comps), std::move(sigmas));
}

TraceFile make_trace_file(const StageTrace& trace, const CameraRig& rig,
                          const std::vector<std::string>& joint_names) {
    TraceFile file;
    file.joint_names = joint_names;
    for (const Camera& cam : rig.cameras) file.camera_labels.push_back(cam.label);
    for (const StageRecord& rec : trace.stages) {
        TraceFile::Stage s;
        s.pose = rec.lift_failed ? Pose3D::zero(static_cast<int>(joint_names.size()))
                                 : rec.lift.pose;
        s.lift_failed = rec.lift_failed;
        s.detected = rec.detected;
        s.fused = rec.fused;
        s.reprojections = rec.reprojections;
        file.stages.push_back(std::move(s));
    }
    return file;
}

namespace {

void write_uv_block(Writer& w, const Pose2D& pose) {
    for (int p = 0; p < pose.joint_count(); ++p) {
        w.fields(format_g17(pose.joints(0, p)), format_g17(pose.joints(1, p)));
    }
}

Pose2D read_uv_block(Reader& r, int joints) {
    Eigen::Matrix2Xd m(2, joints);
    for (int p = 0; p < joints; ++p) {
        const auto toks = split_ws(r.require("u v line"));
        if (toks.size() != 2) r.fail("expected 2 values");
        m(0, p) = r.to_double(toks[0]);
        m(1, p) = r.to_double(toks[1]);
    }
    return Pose2D(std::move(m));
}

}  // namespace

void write_trace(const std::string& path, const TraceFile& file) {
    Writer w(path);
    w.line("mvlift-trace v1");
    write_name_list(w, "joints", file.joint_names);
    write_name_list(w, "cameras", file.camera_labels);
    w.line("stages: " + std::to_string(file.stages.size()));
    for (size_t s = 0; s < file.stages.size(); ++s) {
        const TraceFile::Stage& stage = file.stages[s];
        w.line("stage: " + std::to_string(s));
        w.line(std::string("failed: ") + (stage.lift_failed ? "1" : "0"));
        w.line("pose:");
        write_xyz_block(w, stage.pose.joints);
        for (size_t c = 0; c < file.camera_labels.size(); ++c) {
            w.line("view: " + file.camera_labels[c]);
            w.line("detected:");
            const Detections2D& det = stage.detected[c];
            for (int p = 0; p < det.pose.joint_count(); ++p) {
                w.fields(format_g17(det.pose.joints(0, p)),
                         format_g17(det.pose.joints(1, p)),
                         format_g17(det.confidence_of(p)),
                         det.pose.visible(p) ? 1 : 0);
            }
            w.line("fused:");
            write_uv_block(w, stage.fused[c]);
            w.line("reprojected:");
            write_uv_block(w, stage.reprojections[c]);
        }
    }
}

TraceFile read_trace(const std::string& path) {
    Reader r(path);
    r.expect_header("trace");
    TraceFile file;
    const auto raw_names = read_name_list(r, "joints");
    const auto perm = joint_permutation(raw_names, file.joint_names);
    file.camera_labels = read_name_list(r, "cameras");
    const int joints = static_cast<int>(raw_names.size());
    const int stages = static_cast<int>(r.to_int(r.field("stages")));
    for (int s = 0; s < stages; ++s) {
        if (static_cast<int>(r.to_int(r.field("stage"))) != s) {
            r.fail("stages must be consecutive from 0");
        }
        TraceFile::Stage stage;
        stage.lift_failed = r.to_int(r.field("failed")) != 0;
        if (r.field("pose") != "") r.fail("pose takes no inline value");
        stage.pose = Pose3D(permute_cols(read_xyz_block(r, joints), perm));
        for (const auto& label : file.camera_labels) {
            if (r.field("view") != label) r.fail("expected view " + label);
            if (r.field("detected") != "") r.fail("detected takes no inline value");
            Eigen::Matrix2Xd pts(2, joints);
            Eigen::VectorXd conf(joints);
            std::vector<std::uint8_t> vis(static_cast<size_t>(joints), 1);
            for (int p = 0; p < joints; ++p) {
                const auto toks = split_ws(r.require("u v conf vis line"));
                if (toks.size() != 4) r.fail("expected 4 values");
                pts(0, p) = r.to_double(toks[0]);
                pts(1, p) = r.to_double(toks[1]);
                conf[p] = r.to_double(toks[2]);
                vis[static_cast<size_t>(p)] =
                    static_cast<std::uint8_t>(r.to_int(toks[3]) != 0);
            }
            Detections2D det;
            det.pose =
                Pose2D(permute_cols(Eigen::Matrix2Xd(pts), perm), permute(vis, perm));
            Eigen::VectorXd conf_p(joints);
            for (int p = 0; p < joints; ++p) {
                conf_p[perm[static_cast<size_t>(p)]] = conf[p];
            }
            det.confidence = std::move(conf_p);
            stage.detected.push_back(std::move(det));
            if (r.field("fused") != "") r.fail("fused takes no inline value");
            stage.fused.push_back(
                Pose2D(permute_cols(read_uv_block(r, joints).joints, perm)));
            if (r.field("reprojected") != "") r.fail("reprojected takes no inline value");
            stage.reprojections.push_back(
                Pose2D(permute_cols(read_uv_block(r, joints).joints, perm)));
        }
        file.stages.push_back(std::move(stage));
    }
    return file;
}

void write_report(const std::string& path, const EvalReport& report) {
    Writer w(path);
    w.line("mvlift-report v1");
    w.line("protocol: " + std::to_string(report.protocol));
    w.line("joints: " + std::to_string(report.joint_subset_size));
    w.line("frames: " + std::to_string(report.per_frame_mm.size()));
    w.line("fingerprint: " + (report.config_fingerprint.empty()
                                  ? std::string("-")
                                  : report.config_fingerprint));
    w.line("mean_mm: " + format_g17(report.mean_mm));
    w.line("median_mm: " + format_g17(report.median_mm));
    std::string pj = "per_joint: " + std::to_string(report.per_joint_mm.size());
    for (Eigen::Index i = 0; i < report.per_joint_mm.size(); ++i) {
        pj += " " + format_g17(report.per_joint_mm[i]);
    }
    w.line(pj);
    std::string sc = "sorted_curve: " + std::to_string(report.sorted_curve.size());
    for (double v : report.sorted_curve) sc += " " + format_g17(v);
    w.line(sc);
    w.line("per_frame:");
    for (size_t f = 0; f < report.per_frame_mm.size(); ++f) {
        w.fields(f, format_g17(report.per_frame_mm[f]));
    }
}

EvalReport read_report(const std::string& path) {
    Reader r(path);
    r.expect_header("report");
    EvalReport rep;
    rep.protocol = static_cast<int>(r.to_int(r.field("protocol")));
    rep.joint_subset_size = static_cast<int>(r.to_int(r.field("joints")));
    const int frames = static_cast<int>(r.to_int(r.field("frames")));
    rep.config_fingerprint = r.field("fingerprint");
    if (rep.config_fingerprint == "-") rep.config_fingerprint.clear();
    rep.mean_mm = r.to_double(r.field("mean_mm"));
    rep.median_mm = r.to_double(r.field("median_mm"));
    const auto pj = split_ws(r.field("per_joint"));
    if (pj.empty()) r.fail("per_joint: empty");
    rep.per_joint_mm.resize(r.to_int(pj[0]));
    if (static_cast<size_t>(rep.per_joint_mm.size()) + 1 != pj.size()) {
        r.fail("per_joint count mismatch");
    }
    for (Eigen::Index i = 0; i < rep.per_joint_mm.size(); ++i) {
        rep.per_joint_mm[i] = r.to_double(pj[static_cast<size_t>(i) + 1]);
    }
    const auto sc = split_ws(r.field("sorted_curve"));
    if (sc.empty()) r.fail("sorted_curve: empty");
    const int curve = static_cast<int>(r.to_int(sc[0]));
    if (static_cast<size_t>(curve) + 1 != sc.size()) r.fail("sorted_curve count mismatch");
    for (int i = 0; i < curve; ++i) {
        rep.sorted_curve.push_back(r.to_double(sc[static_cast<size_t>(i) + 1]));
    }
    if (r.field("per_frame") != "") r.fail("per_frame takes no inline value");
    for (int f = 0; f < frames; ++f) {
        const auto toks = split_ws(r.require("per-frame line"));
        if (toks.size() != 2) r.fail("expected 'index error'");
        rep.per_frame_mm.push_back(r.to_double(toks[1]));
    }
    return rep;
}

void write_ablation(const std::string& path, const AblationTable& table) {
    Writer w(path);
    w.line("mvlift-ablation v1");
    w.line("rows: " + std::to_string(table.rows.size()));
    for (const AblationRow& row : table.rows) {
        w.fields("row:",
                 row.robust_mode == RobustMode::Huber ? "huber" : "frobenius",
                 row.rotation_mode == RotationMode::Marginalize ? "marginalize"
                                                                : "argmin",
                 row.camera_count, format_g17(row.p1_mean), format_g17(row.p1_std),
                 format_g17(row.p2_mean), format_g17(row.p2_std),
                 row.failed_frames);
    }
}

AblationTable read_ablation(const std::string& path) {
    Reader r(path);
    r.expect_header("ablation");
    AblationTable table;
    const int rows = static_cast<int>(r.to_int(r.field("rows")));
    for (int i = 0; i < rows; ++i) {
        const auto toks = split_ws(r.field("row"));
        if (toks.size() != 8) r.fail("row needs 8 values");
        AblationRow row;
        if (toks[0] == "huber") {
            row.robust_mode = RobustMode::Huber;
        } else if (toks[0] == "frobenius") {
            row.robust_mode = RobustMode::Frobenius;
        } else {
            r.fail("bad robust mode '" + toks[0] + "'");
        }
        if (toks[1] == "marginalize") {
            row.rotation_mode = RotationMode::Marginalize;
        } else if (toks[1] == "argmin") {
            row.rotation_mode = RotationMode::Argmin;
        } else {
            r.fail("bad rotation mode '" + toks[1] + "'");
        }
        row.camera_count = static_cast<int>(r.to_int(toks[2]));
        row.p1_mean = r.to_double(toks[3]);
        row.p1_std = r.to_double(toks[4]);
        row.p2_mean = r.to_double(toks[5]);
        row.p2_std = r.to_double(toks[6]);
        row.failed_frames = static_cast<int>(r.to_int(toks[7]));
        row.label = toks[0] + " " + toks[1] +
                    (row.camera_count == 2 ? " 2cam" : "");
        table.rows.push_back(row);
    }
    return table;
}

SceneFile read_scene(const std::string& path) {
    Reader r(path);
    r.expect_header("scene");
    SceneFile file;
    RigSpec& rig = file.spec.rig;
    SubjectSpec& subject = file.spec.subject;
    NoiseSpec& noise = file.spec.noise;

    std::string line;
    while (r.next(line)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) r.fail("expected 'key: value'");
        const std::string key = line.substr(0, colon);
        const auto toks = split_ws(line.substr(colon + 1));
        if (toks.size() != 1) r.fail(key + ": expected one value");
        const std::string& val = toks[0];
        if (key == "seed") {
            file.spec.seed = static_cast<std::uint64_t>(std::strtoull(val.c_str(), nullptr, 10));
        } else if (key == "frames") {
            file.frames = static_cast<int>(r.to_int(val));
        } else if (key == "cameras") {
            rig.camera_count = static_cast<int>(r.to_int(val));
        } else if (key == "camera_distance_mm") {
            rig.distance_mm = r.to_double(val);
        } else if (key == "basis") {
            file.basis_ref = val;
        } else if (key == "basis_size") {
            file.basis_size = static_cast<int>(r.to_int(val));
        } else if (key == "coeff_scale") {
            subject.coeff_scale = r.to_double(val);
        } else if (key == "scale_min") {
            subject.scale_min = r.to_double(val);
        } else if (key == "scale_max") {
            subject.scale_max = r.to_double(val);
        } else if (key == "yaw_min_deg") {
            subject.yaw_min = r.to_double(val) * M_PI / 180.0;
        } else if (key == "yaw_max_deg") {
            subject.yaw_max = r.to_double(val) * M_PI / 180.0;
        } else if (key == "off_span") {
            subject.off_span = r.to_double(val);
        } else if (key == "noise_px") {
            noise.sigma_px = r.to_double(val);
        } else if (key == "outlier_rate") {
            noise.outlier_rate = r.to_double(val);
        } else if (key == "outlier_min_px") {
            noise.outlier_min_px = r.to_double(val);
        } else if (key == "outlier_max_px") {
            noise.outlier_max_px = r.to_double(val);
        } else if (key == "missing_rate") {
            noise.missing_rate = r.to_double(val);
        } else {
            r.fail("unknown key '" + key + "'");
        }
    }

    if (file.basis_ref == "builtin") {
        file.spec.subject.basis = builtin_basis(file.basis_size);
    } else {
        const fs::path base = fs::path(path).parent_path();
        file.spec.subject.basis = read_basis((base / file.basis_ref).string());
    }
    return file;
}

void write_scene(const std::string& path, const SceneFile& file) {
    Writer w(path);
    w.line("mvlift-scene v1");
    w.line("seed: " + std::to_string(file.spec.seed));
    w.line("frames: " + std::to_string(file.frames));
    w.line("cameras: " + std::to_string(file.spec.rig.camera_count));
    w.line("camera_distance_mm: " + format_g17(file.spec.rig.distance_mm));
    w.line("basis: " + file.basis_ref);
    w.line("basis_size: " + std::to_string(file.basis_size));
    w.line("coeff_scale: " + format_g17(file.spec.subject.coeff_scale));
    w.line("scale_min: " + format_g17(file.spec.subject.scale_min));
    w.line("scale_max: " + format_g17(file.spec.subject.scale_max));
    w.line("yaw_min_deg: " + format_g17(file.spec.subject.yaw_min * 180.0 / M_PI));
    w.line("yaw_max_deg: " + format_g17(file.spec.subject.yaw_max * 180.0 / M_PI));
    w.line("off_span: " + format_g17(file.spec.subject.off_span));
    w.line("noise_px: " + format_g17(file.spec.noise.sigma_px));
    w.line("outlier_rate: " + format_g17(file.spec.noise.outlier_rate));
    w.line("outlier_min_px: " + format_g17(file.spec.noise.outlier_min_px));
    w.line("outlier_max_px: " + format_g17(file.spec.noise.outlier_max_px));
    w.line("missing_rate: " + format_g17(file.spec.noise.missing_rate));
}

CropBox crop_box(const Eigen::Vector2d& min_xy, const Eigen::Vector2d& max_xy,
                 const Eigen::Vector2d& hip, double margin_px) {
    if (!min_xy.allFinite() || !max_xy.allFinite() || !hip.allFinite() ||
        !(margin_px >= 0.0)) {
        throw DegenerateExtents("crop_box: non-finite input");
    }
    if (min_xy.x() > max_xy.x() || min_xy.y() > max_xy.y()) {
        throw DegenerateExtents("crop_box: min exceeds max");
    }
    // Largest distance from the hip to any extent corner, per axis, so the
    // hip-centered square covers everything.
    double half = 0.0;
    for (int a = 0; a < 2; ++a) {
        half = std::max(half, std::abs(min_xy[a] - hip[a]));
        half = std::max(half, std::abs(max_xy[a] - hip[a]));
    }
    CropBox box;
    box.center = hip;
    box.side = 2.0 * half + 2.0 * margin_px;
    if (!(box.side > 0.0)) {
        throw DegenerateExtents("crop_box: zero-area box");
    }
    return box;
}

void write_bundle(const std::string& dir, const std::vector<Frame>& frames,
                  const CameraRig& rig, const PoseBasis& basis,
                  const std::vector<std::string>& joint_names) {
    fs::create_directories(dir);
    write_calibration((fs::path(dir) / "calibration.txt").string(), rig);
    write_basis((fs::path(dir) / "basis.txt").string(), basis, joint_names);

    DetectionsFile det;
    det.joint_names = joint_names;
    for (const Camera& cam : rig.cameras) det.camera_labels.push_back(cam.label);
    PosesFile gt;
    gt.joint_names = joint_names;
    for (const Frame& frame : frames) {
        det.frames.push_back(frame.corrupted);
        gt.poses.push_back(frame.gt_pose);
        gt.scales.push_back(frame.gt_scale);
        gt.angles.push_back(frame.gt_angle);
        gt.ledgers.push_back(frame.ledger);
    }
    write_detections((fs::path(dir) / "detections.txt").string(), det);
    write_poses((fs::path(dir) / "gt.txt").string(), gt);
}

Bundle read_bundle(const std::string& dir) {
    Bundle bundle;
    bundle.rig = read_calibration((fs::path(dir) / "calibration.txt").string());
    bundle.basis = read_basis((fs::path(dir) / "basis.txt").string());
    bundle.detections = read_detections((fs::path(dir) / "detections.txt").string());
    const fs::path gt_path = fs::path(dir) / "gt.txt";
    if (fs::exists(gt_path)) {
        bundle.gt = read_poses(gt_path.string());
        bundle.has_gt = true;
    }
    return bundle;
}

std::vector<Frame> frames_from_bundle(const Bundle& bundle) {
    if (!bundle.has_gt) {
        throw InvalidArgument("frames_from_bundle: bundle has no ground truth");
    }
    if (bundle.gt.poses.size() != bundle.detections.frames.size()) {
        throw InvalidArgument("frames_from_bundle: detections/gt frame mismatch");
    }
    std::vector<Frame> frames;
    frames.reserve(bundle.gt.poses.size());
    for (size_t f = 0; f < bundle.gt.poses.size(); ++f) {
        Frame frame;
        frame.gt_pose = bundle.gt.poses[f];
        frame.gt_scale = bundle.gt.scales[f];
        frame.gt_angle = bundle.gt.angles[f];
        frame.ledger = bundle.gt.ledgers[f];
        frame.corrupted = bundle.detections.frames[f];
        for (const Camera& cam : bundle.rig.cameras) {
            frame.clean.push_back(project_pose(cam, frame.gt_pose, 1.0));
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

}  // namespace mvlift
