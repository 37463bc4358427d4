#include "coptact/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace coptact::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& context) {
    if (!obj.is_object()) throw SchemaError(context + ": expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw SchemaError(context + ": unknown key '" + key + "'");
        }
    }
}

json rotation_to_json(const geom::Rotation& r) {
    json out = json::array();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.push_back(r.matrix()(i, j));
    return out;
}

geom::Rotation rotation_from_json(const json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 9) {
        throw SchemaError(context + ": rotation must be a row-major 9-element array");
    }
    Eigen::Matrix3d m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = j[i].get<double>();
    try {
        return geom::Rotation::from_matrix(m);
    } catch (const Error& e) {
        throw SchemaError(context + ": " + e.what());
    }
}

json vector3_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vector3_from_json(const json& j, const std::string& context) {
    if (!j.is_array() || j.size() != 3) {
        throw SchemaError(context + ": expected a 3-element array");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// ---- layout ---------------------------------------------------------------

json layout_to_json(const sensor::TaxelLayout& layout) {
    json j;
    j["n_taxels"] = layout.size();
    j["positions"] = json::array();
    j["orientations"] = json::array();
    for (int i = 0; i < layout.size(); ++i) {
        j["positions"].push_back(vector3_to_json(layout.positions[i]));
        j["orientations"].push_back(rotation_to_json(layout.orientations[i]));
    }
    j["normal_axis"] = layout.normal_axis;
    j["epsilon"] = layout.epsilon;
    j["sigma"] = layout.sigma;
    j["lambda"] = layout.lambda;
    j["normal_only"] = layout.normal_only;
    if (layout.solve_over_all_taxels) j["solve_over_all_taxels"] = true;
    return j;
}

sensor::TaxelLayout layout_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"n_taxels", "positions", "orientations", "normal_axis", "epsilon", "sigma",
                         "lambda", "normal_only", "solve_over_all_taxels"},
                        "layout");
    sensor::TaxelLayout layout;
    const int n = j.at("n_taxels").get<int>();
    const json& pos = j.at("positions");
    const json& rot = j.at("orientations");
    if (!pos.is_array() || static_cast<int>(pos.size()) != n) {
        throw SchemaError("layout: positions must hold n_taxels entries");
    }
    if (!rot.is_array() || static_cast<int>(rot.size()) != n) {
        throw SchemaError("layout: orientations must hold n_taxels entries");
    }
    for (int i = 0; i < n; ++i) {
        layout.positions.push_back(vector3_from_json(pos[i], "layout.positions"));
        layout.orientations.push_back(rotation_from_json(rot[i], "layout.orientations"));
    }
    layout.normal_axis = j.at("normal_axis").get<int>();
    layout.epsilon = j.at("epsilon").get<double>();
    layout.sigma = j.at("sigma").get<double>();
    layout.lambda = j.at("lambda").get<double>();
    layout.normal_only = j.at("normal_only").get<bool>();
    layout.solve_over_all_taxels = j.value("solve_over_all_taxels", false);
    try {
        layout.validate();
    } catch (const Error& e) {
        throw SchemaError(std::string("layout: ") + e.what());
    }
    return layout;
}

void save_layout(const std::string& path, const sensor::TaxelLayout& layout) {
    save_json_file(path, layout_to_json(layout));
}

sensor::TaxelLayout load_layout(const std::string& path) {
    return layout_from_json(load_json_file(path));
}

// ---- chain ------------------------------------------------------------------

namespace {

json transform_to_json(const geom::RigidTransform& t) {
    json j;
    j["rotation"] = rotation_to_json(t.rotation);
    j["translation"] = vector3_to_json(t.translation);
    return j;
}

geom::RigidTransform transform_from_json(const json& j, const std::string& context) {
    reject_unknown_keys(j, {"rotation", "translation"}, context);
    return {rotation_from_json(j.at("rotation"), context),
            vector3_from_json(j.at("translation"), context)};
}

}  // namespace

json chain_to_json(const kin::KinematicChain& chain) {
    json j;
    j["joints"] = json::array();
    for (const auto& joint : chain.joints) {
        json jj;
        jj["offset"] = transform_to_json(joint.offset);
        jj["axis"] = vector3_to_json(joint.axis);
        j["joints"].push_back(jj);
    }
    j["sensor_offset"] = transform_to_json(chain.sensor_offset);
    return j;
}

kin::KinematicChain chain_from_json(const json& j) {
    reject_unknown_keys(j, {"joints", "sensor_offset"}, "chain");
    kin::KinematicChain chain;
    for (const auto& jj : j.at("joints")) {
        reject_unknown_keys(jj, {"offset", "axis"}, "chain.joints");
        kin::RevoluteJoint joint;
        joint.offset = transform_from_json(jj.at("offset"), "chain.joints.offset");
        joint.axis = vector3_from_json(jj.at("axis"), "chain.joints.axis");
        chain.joints.push_back(joint);
    }
    chain.sensor_offset = transform_from_json(j.at("sensor_offset"), "chain.sensor_offset");
    try {
        chain.validate();
    } catch (const Error& e) {
        throw SchemaError(std::string("chain: ") + e.what());
    }
    return chain;
}

void save_chain(const std::string& path, const kin::KinematicChain& chain) {
    save_json_file(path, chain_to_json(chain));
}

kin::KinematicChain load_chain(const std::string& path) {
    return chain_from_json(load_json_file(path));
}

// ---- CSV helpers -------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_double(const std::string& s, const std::string& context, int line_no) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw SchemaError(context + ": line " + std::to_string(line_no) +
                          ": not a number: '" + s + "'");
    }
    return v;
}

std::string reading_header(int n_taxels) {
    std::string h = "t";
    for (int i = 0; i < n_taxels; ++i) {
        h += ",fx_" + std::to_string(i) + ",fy_" + std::to_string(i) + ",fz_" + std::to_string(i);
    }
    return h;
}

void append_reading(std::string& line, const sensor::TaxelReading& r) {
    for (const auto& f : r.forces) {
        line += "," + format_double(f.x()) + "," + format_double(f.y()) + "," +
                format_double(f.z());
    }
}

std::vector<std::string> read_lines(const std::string& path, const std::string& context) {
    std::ifstream in(path);
    if (!in) throw SchemaError(context + ": cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

// ---- reading stream ------------------------------------------------------------

void save_readings_csv(const std::string& path, const std::vector<sensor::TaxelReading>& readings,
                       int n_taxels) {
    std::string out = reading_header(n_taxels) + "\n";
    for (const auto& r : readings) {
        std::string line = format_double(r.timestamp);
        append_reading(line, r);
        out += line + "\n";
    }
    write_text_file(path, out);
}

std::vector<sensor::TaxelReading> load_readings_csv(const std::string& path, int n_taxels) {
    const auto lines = read_lines(path, "readings");
    if (lines.empty() || lines[0] != reading_header(n_taxels)) {
        throw SchemaError("readings: bad or missing header in '" + path + "'");
    }
    std::vector<sensor::TaxelReading> out;
    for (size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto cells = split_csv_line(lines[ln]);
        if (static_cast<int>(cells.size()) != 1 + 3 * n_taxels) {
            throw SchemaError("readings: line " + std::to_string(ln + 1) + ": expected " +
                              std::to_string(1 + 3 * n_taxels) + " columns");
        }
        sensor::TaxelReading r;
        r.timestamp = parse_double(cells[0], "readings", static_cast<int>(ln + 1));
        for (int i = 0; i < n_taxels; ++i) {
            r.forces.emplace_back(parse_double(cells[1 + 3 * i], "readings", ln + 1),
                                  parse_double(cells[2 + 3 * i], "readings", ln + 1),
                                  parse_double(cells[3 + 3 * i], "readings", ln + 1));
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ---- calibration dataset ---------------------------------------------------------

void save_dataset_csv(const std::string& path, const synth::CalibDataset& dataset, int n_taxels) {
    std::string header = "t,q0,q1,q2,q3,tau0,tau1,tau2,tau3";
    for (int i = 0; i < n_taxels; ++i) {
        header += ",fx_" + std::to_string(i) + ",fy_" + std::to_string(i) + ",fz_" +
                  std::to_string(i);
    }
    std::string out = header + "\n";
    for (const auto& s : dataset) {
        std::string line = format_double(s.reading.timestamp);
        for (int j = 0; j < 4; ++j) line += "," + format_double(s.q(j));
        for (int j = 0; j < 4; ++j) line += "," + format_double(s.tau(j));
        append_reading(line, s.reading);
        out += line + "\n";
    }
    write_text_file(path, out);
}

synth::CalibDataset load_dataset_csv(const std::string& path, int n_taxels) {
    const auto lines = read_lines(path, "dataset");
    std::string header = "t,q0,q1,q2,q3,tau0,tau1,tau2,tau3";
    for (int i = 0; i < n_taxels; ++i) {
        header += ",fx_" + std::to_string(i) + ",fy_" + std::to_string(i) + ",fz_" +
                  std::to_string(i);
    }
    if (lines.empty() || lines[0] != header) {
        throw SchemaError("dataset: bad or missing header in '" + path + "'");
    }
    synth::CalibDataset out;
    for (size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto cells = split_csv_line(lines[ln]);
        if (static_cast<int>(cells.size()) != 9 + 3 * n_taxels) {
            throw SchemaError("dataset: line " + std::to_string(ln + 1) + ": expected " +
                              std::to_string(9 + 3 * n_taxels) + " columns");
        }
        synth::CalibSample s;
        s.reading.timestamp = parse_double(cells[0], "dataset", ln + 1);
        for (int j = 0; j < 4; ++j) s.q(j) = parse_double(cells[1 + j], "dataset", ln + 1);
        for (int j = 0; j < 4; ++j) s.tau(j) = parse_double(cells[5 + j], "dataset", ln + 1);
        for (int i = 0; i < n_taxels; ++i) {
            s.reading.forces.emplace_back(parse_double(cells[9 + 3 * i], "dataset", ln + 1),
                                          parse_double(cells[10 + 3 * i], "dataset", ln + 1),
                                          parse_double(cells[11 + 3 * i], "dataset", ln + 1));
        }
        out.push_back(std::move(s));
    }
    return out;
}

// ---- CoP stream --------------------------------------------------------------------

void save_cop_csv(const std::string& path, const std::vector<CopRow>& rows) {
    std::string out = "t,fx,fy,fz,px,py,pz,active_count,valid\n";
    for (const auto& r : rows) {
        std::string line = format_double(r.t);
        for (int i = 0; i < 3; ++i) line += "," + format_double(r.contact.force(i));
        for (int i = 0; i < 3; ++i) line += "," + format_double(r.contact.position(i));
        line += "," + std::to_string(r.contact.active_count) + "," + (r.valid ? "1" : "0");
        out += line + "\n";
    }
    write_text_file(path, out);
}

std::vector<CopRow> load_cop_csv(const std::string& path) {
    const auto lines = read_lines(path, "cop");
    if (lines.empty() || lines[0] != "t,fx,fy,fz,px,py,pz,active_count,valid") {
        throw SchemaError("cop: bad or missing header in '" + path + "'");
    }
    std::vector<CopRow> out;
    for (size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto cells = split_csv_line(lines[ln]);
        if (cells.size() != 9) {
            throw SchemaError("cop: line " + std::to_string(ln + 1) + ": expected 9 columns");
        }
        CopRow r;
        r.t = parse_double(cells[0], "cop", ln + 1);
        for (int i = 0; i < 3; ++i) r.contact.force(i) = parse_double(cells[1 + i], "cop", ln + 1);
        for (int i = 0; i < 3; ++i) {
            r.contact.position(i) = parse_double(cells[4 + i], "cop", ln + 1);
        }
        r.contact.active_count = static_cast<int>(parse_double(cells[7], "cop", ln + 1));
        r.valid = parse_double(cells[8], "cop", ln + 1) != 0.0;
        out.push_back(r);
    }
    return out;
}

// ---- manifest ------------------------------------------------------------------------

void save_manifest(const std::string& path, const SynthManifest& manifest) {
    json j;
    j["spec"] = manifest.spec;
    j["seed"] = manifest.seed;
    j["true_orientations"] = json::array();
    for (const auto& r : manifest.true_orientations) {
        j["true_orientations"].push_back(rotation_to_json(r));
    }
    j["timestamp"] = manifest.timestamp;
    save_json_file(path, j);
}

SynthManifest load_manifest(const std::string& path) {
    const json j = load_json_file(path);
    reject_unknown_keys(j, {"spec", "seed", "true_orientations", "timestamp"}, "manifest");
    SynthManifest m;
    m.spec = j.at("spec");
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& r : j.at("true_orientations")) {
        m.true_orientations.push_back(rotation_from_json(r, "manifest.true_orientations"));
    }
    m.timestamp = j.value("timestamp", "");
    return m;
}

// ---- calibration report -----------------------------------------------------------------

json calib_report_to_json(const calib::CalibReport& report) {
    json j;
    j["loss_history"] = report.loss_history;
    j["final_loss"] = report.final_loss;
    j["skipped_count"] = report.skipped_count;
    j["rotations"] = json::array();
    for (const auto& r : report.final_rotations) j["rotations"].push_back(rotation_to_json(r));
    if (!report.geodesic_errors.empty()) j["geodesic_errors"] = report.geodesic_errors;
    return j;
}

void save_calib_report(const std::string& path, const calib::CalibReport& report) {
    save_json_file(path, calib_report_to_json(report));
}

void save_loss_history_csv(const std::string& path, const std::vector<double>& history) {
    std::string out = "step,loss\n";
    for (size_t i = 0; i < history.size(); ++i) {
        out += std::to_string(i) + "," + format_double(history[i]) + "\n";
    }
    write_text_file(path, out);
}

// ---- actuator trajectories -----------------------------------------------------------

void save_trajectory_csv(const std::string& path, const sysid::Trajectory& traj) {
    std::string out = "t,q_target,q_measured\n";
    for (size_t i = 0; i < traj.times.size(); ++i) {
        out += format_double(traj.times[i]) + "," + format_double(traj.target[i]) + "," +
               format_double(traj.measured[i]) + "\n";
    }
    write_text_file(path, out);
}

sysid::Trajectory load_trajectory_csv(const std::string& path) {
    const auto lines = read_lines(path, "trajectory");
    if (lines.empty() || lines[0] != "t,q_target,q_measured") {
        throw SchemaError("trajectory: bad or missing header in '" + path + "'");
    }
    sysid::Trajectory traj;
    for (size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto cells = split_csv_line(lines[ln]);
        if (cells.size() != 3) {
            throw SchemaError("trajectory: line " + std::to_string(ln + 1) +
                              ": expected 3 columns");
        }
        traj.times.push_back(parse_double(cells[0], "trajectory", ln + 1));
        traj.target.push_back(parse_double(cells[1], "trajectory", ln + 1));
        traj.measured.push_back(parse_double(cells[2], "trajectory", ln + 1));
    }
    return traj;
}

// ---- latent trajectories --------------------------------------------------------------

void save_latent_trajectory_csv(const std::string& path, const probe::LatentTrajectory& traj) {
    const int d = static_cast<int>(traj.latents.cols());
    const int k = static_cast<int>(traj.targets.cols());
    std::string header = "t";
    for (int i = 0; i < d; ++i) header += ",latent_" + std::to_string(i);
    for (int i = 0; i < k; ++i) header += ",target_" + std::to_string(i);
    std::string out = header + "\n";
    for (long r = 0; r < traj.latents.rows(); ++r) {
        std::string line = format_double(static_cast<double>(r));
        for (int i = 0; i < d; ++i) line += "," + format_double(traj.latents(r, i));
        for (int i = 0; i < k; ++i) line += "," + format_double(traj.targets(r, i));
        out += line + "\n";
    }
    write_text_file(path, out);
}

probe::LatentTrajectory load_latent_trajectory_csv(const std::string& path, int dim_latent,
                                                   int dim_target) {
    const auto lines = read_lines(path, "latents");
    std::string header = "t";
    for (int i = 0; i < dim_latent; ++i) header += ",latent_" + std::to_string(i);
    for (int i = 0; i < dim_target; ++i) header += ",target_" + std::to_string(i);
    if (lines.empty() || lines[0] != header) {
        throw SchemaError("latents: bad or missing header in '" + path + "'");
    }
    std::vector<std::vector<double>> rows;
    for (size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto cells = split_csv_line(lines[ln]);
        if (static_cast<int>(cells.size()) != 1 + dim_latent + dim_target) {
            throw SchemaError("latents: line " + std::to_string(ln + 1) + ": expected " +
                              std::to_string(1 + dim_latent + dim_target) + " columns");
        }
        std::vector<double> row;
        for (size_t c = 1; c < cells.size(); ++c) {
            row.push_back(parse_double(cells[c], "latents", ln + 1));
        }
        rows.push_back(std::move(row));
    }
    probe::LatentTrajectory traj;
    traj.latents.resize(rows.size(), dim_latent);
    traj.targets.resize(rows.size(), dim_target);
    for (size_t r = 0; r < rows.size(); ++r) {
        for (int i = 0; i < dim_latent; ++i) traj.latents(r, i) = rows[r][i];
        for (int i = 0; i < dim_target; ++i) traj.targets(r, i) = rows[r][dim_latent + i];
    }
    return traj;
}

// ---- files ---------------------------------------------------------------------------

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError("'" + path + "': " + e.what());
    }
}

void save_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace coptact::io
