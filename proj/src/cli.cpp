#include "coptact/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "coptact/io.hpp"
#include "coptact/probe.hpp"
#include "coptact/synthetic.hpp"
#include "coptact/sysid.hpp"

namespace coptact::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json parse_override_value(const std::string& text) {
    const json parsed = json::parse(text, nullptr, false);
    if (!parsed.is_discarded()) return parsed;
    return json(text);  // bare strings stay strings
}

void apply_override(json& config, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
        throw SchemaError("--set expects key=value, got '" + spec + "'");
    }
    const std::string path = spec.substr(0, eq);
    json* node = &config;
    size_t start = 0;
    while (true) {
        const size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw SchemaError("--set: empty key segment in '" + spec + "'");
        if (dot == std::string::npos) {
            (*node)[key] = parse_override_value(spec.substr(eq + 1));
            break;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

double require_number(const json& obj, const std::string& key, const std::string& context) {
    if (!obj.contains(key) || !obj.at(key).is_number()) {
        throw SchemaError(context + ": missing numeric field '" + key + "'");
    }
    return obj.at(key).get<double>();
}

std::string require_string(const json& obj, const std::string& key, const std::string& context) {
    if (!obj.contains(key) || !obj.at(key).is_string()) {
        throw SchemaError(context + ": missing string field '" + key + "'");
    }
    return obj.at(key).get<std::string>();
}

Eigen::Vector4d require_vector4(const json& obj, const std::string& key,
                                const std::string& context) {
    if (!obj.contains(key) || !obj.at(key).is_array() || obj.at(key).size() != 4) {
        throw SchemaError(context + ": field '" + key + "' must be a 4-element array");
    }
    Eigen::Vector4d v;
    for (int i = 0; i < 4; ++i) v(i) = obj.at(key)[i].get<double>();
    return v;
}

std::string out_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

}  // namespace

json load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json config = io::load_json_file(path);
    for (const auto& o : overrides) apply_override(config, o);
    if (const char* env_seed = std::getenv("COPTACT_SEED"); env_seed && config.contains("seed")) {
        config["seed"] = std::strtoull(env_seed, nullptr, 10);
    }
    return config;
}

// ---- synth -----------------------------------------------------------------

int run_synth(const json& config, int threads) {
    (void)threads;
    io::reject_unknown_keys(
        config, {"seed", "output_dir", "layout", "contacts", "chain_file", "q_nominal", "q_jitter",
                 "noise"},
        "synth");
    const std::uint64_t seed = config.value("seed", std::uint64_t{0});
    const std::string output_dir = require_string(config, "output_dir", "synth");

    const json& jl = config.at("layout");
    io::reject_unknown_keys(jl,
                            {"radius", "rows", "cols", "extent_u", "extent_v", "epsilon", "sigma",
                             "lambda", "normal_only", "perturbation_deg"},
                            "synth.layout");
    synth::CapLayoutSpec cap;
    cap.radius = require_number(jl, "radius", "synth.layout");
    cap.rows = static_cast<int>(require_number(jl, "rows", "synth.layout"));
    cap.cols = static_cast<int>(require_number(jl, "cols", "synth.layout"));
    cap.extent_u = require_number(jl, "extent_u", "synth.layout");
    cap.extent_v = require_number(jl, "extent_v", "synth.layout");
    cap.epsilon = require_number(jl, "epsilon", "synth.layout");
    cap.sigma = require_number(jl, "sigma", "synth.layout");
    cap.lambda = require_number(jl, "lambda", "synth.layout");
    cap.normal_only = jl.value("normal_only", false);
    cap.perturbation = jl.value("perturbation_deg", 0.0) * M_PI / 180.0;
    cap.seed = seed;

    const json& jc = config.at("contacts");
    io::reject_unknown_keys(jc,
                            {"count", "force_min", "force_max", "shear_ratio_min",
                             "shear_ratio_max", "edge_margin"},
                            "synth.contacts");
    synth::ContactSpec contacts;
    const int count = static_cast<int>(require_number(jc, "count", "synth.contacts"));
    contacts.force_min = require_number(jc, "force_min", "synth.contacts");
    contacts.force_max = require_number(jc, "force_max", "synth.contacts");
    contacts.shear_ratio_min = jc.value("shear_ratio_min", 0.0);
    contacts.shear_ratio_max = jc.value("shear_ratio_max", 0.5);
    contacts.edge_margin = jc.value("edge_margin", 0.18);
    contacts.seed = seed + 1;

    const kin::KinematicChain chain = io::load_chain(require_string(config, "chain_file", "synth"));
    const Eigen::Vector4d q_nominal = require_vector4(config, "q_nominal", "synth");

    synth::NoiseSpec noise;
    if (config.contains("noise")) {
        io::reject_unknown_keys(config.at("noise"), {"force_multiplicative", "torque_additive"},
                                "synth.noise");
        noise.force_multiplicative = config.at("noise").value("force_multiplicative", 0.0);
        noise.torque_additive = config.at("noise").value("torque_additive", 0.0);
    }
    noise.q_jitter = config.value("q_jitter", 0.0);
    noise.seed = seed + 2;

    // everything validated; now generate and write
    const synth::CapLayout cap_layout = synth::generate_cap_layout(cap);
    const auto contact_list = synth::sample_contacts(cap, contacts, count);
    const sensor::TaxelLayout true_layout =
        cap_layout.layout.with_orientations(cap_layout.true_orientations);
    const synth::CalibDataset dataset =
        synth::synthesize_dataset(contact_list, true_layout, chain, q_nominal, noise);

    fs::create_directories(output_dir);
    io::save_layout(out_path(output_dir, "layout.json"), cap_layout.layout);
    io::save_dataset_csv(out_path(output_dir, "dataset.csv"), dataset, cap_layout.layout.size());

    io::SynthManifest manifest;
    manifest.spec = config;
    manifest.seed = seed;
    manifest.true_orientations = cap_layout.true_orientations;
    manifest.timestamp = timestamp_utc();
    io::save_manifest(out_path(output_dir, "manifest.json"), manifest);

    std::cout << "synth: wrote " << dataset.size() << " samples to " << output_dir << "\n";
    return kExitOk;
}

// ---- calibrate ----------------------------------------------------------------

int run_calibrate(const json& config, int threads) {
    io::reject_unknown_keys(config,
                            {"seed", "output_dir", "layout_file", "dataset_file", "chain_file",
                             "manifest_file", "learning_rate", "steps", "adam_beta1", "adam_beta2",
                             "adam_eps", "init"},
                            "calibrate");
    const std::string output_dir = require_string(config, "output_dir", "calibrate");
    const sensor::TaxelLayout layout =
        io::load_layout(require_string(config, "layout_file", "calibrate"));
    const synth::CalibDataset dataset = io::load_dataset_csv(
        require_string(config, "dataset_file", "calibrate"), layout.size());
    const kin::KinematicChain chain =
        io::load_chain(require_string(config, "chain_file", "calibrate"));

    calib::CalibConfig cfg;
    cfg.learning_rate = config.value("learning_rate", 0.1);
    cfg.steps = config.value("steps", 100);
    cfg.adam_beta1 = config.value("adam_beta1", 0.9);
    cfg.adam_beta2 = config.value("adam_beta2", 0.999);
    cfg.adam_eps = config.value("adam_eps", 1e-8);
    cfg.seed = config.value("seed", std::uint64_t{0});
    cfg.threads = threads;
    const std::string init = config.value("init", std::string("nominal"));
    if (init == "nominal") {
        cfg.init = calib::CalibConfig::Init::Nominal;
    } else if (init == "random") {
        cfg.init = calib::CalibConfig::Init::Random;
    } else {
        throw SchemaError("calibrate: init must be 'nominal' or 'random'");
    }

    std::vector<geom::Rotation> reference;
    bool have_reference = false;
    if (config.contains("manifest_file") && !config.at("manifest_file").get<std::string>().empty()) {
        const io::SynthManifest manifest =
            io::load_manifest(config.at("manifest_file").get<std::string>());
        if (static_cast<int>(manifest.true_orientations.size()) != layout.size()) {
            throw SchemaError("calibrate: manifest rotation count does not match layout");
        }
        reference = manifest.true_orientations;
        have_reference = true;
    }

    const calib::CalibReport report =
        calib::calibrate(dataset, layout, chain, cfg, have_reference ? &reference : nullptr);

    fs::create_directories(output_dir);
    io::save_calib_report(out_path(output_dir, "report.json"), report);
    io::save_loss_history_csv(out_path(output_dir, "loss_history.csv"), report.loss_history);

    std::cout << "calibrate: final loss " << io::format_double(report.final_loss) << "\n";
    if (have_reference) {
        std::vector<double> errs = report.geodesic_errors;
        std::sort(errs.begin(), errs.end());
        const double median = errs[errs.size() / 2];
        std::cout << "calibrate: median geodesic error " << io::format_double(median) << " rad\n";
    }
    return kExitOk;
}

// ---- map -------------------------------------------------------------------------

int run_map(const json& config, int threads) {
    (void)threads;
    io::reject_unknown_keys(
        config, {"output_dir", "layout_file", "direction", "input_file", "output_file"}, "map");
    const std::string output_dir = require_string(config, "output_dir", "map");
    const sensor::TaxelLayout layout = io::load_layout(require_string(config, "layout_file", "map"));
    const std::string direction = require_string(config, "direction", "map");
    const std::string input_file = require_string(config, "input_file", "map");
    const std::string output_file = require_string(config, "output_file", "map");

    fs::create_directories(output_dir);
    if (direction == "to_cop") {
        const auto readings = io::load_readings_csv(input_file, layout.size());
        std::vector<io::CopRow> rows;
        rows.reserve(readings.size());
        for (const auto& r : readings) {
            io::CopRow row;
            row.t = r.timestamp;
            const auto contact = sensor::taxels_to_cop(r, layout);
            row.valid = contact.has_value();
            if (contact) row.contact = *contact;
            rows.push_back(row);
        }
        io::save_cop_csv(out_path(output_dir, output_file), rows);
    } else if (direction == "to_taxels") {
        const auto rows = io::load_cop_csv(input_file);
        std::vector<sensor::TaxelReading> readings;
        readings.reserve(rows.size());
        for (const auto& row : rows) {
            sensor::TaxelReading r;
            if (row.valid) {
                r = sensor::cop_to_taxels(row.contact, layout);
            } else {
                r.forces.assign(layout.size(), Eigen::Vector3d::Zero());
            }
            r.timestamp = row.t;
            readings.push_back(std::move(r));
        }
        io::save_readings_csv(out_path(output_dir, output_file), readings, layout.size());
    } else {
        throw SchemaError("map: direction must be 'to_cop' or 'to_taxels'");
    }
    return kExitOk;
}

// ---- sysid ----------------------------------------------------------------------

namespace {

sysid::ActuatorParams params_from_json(const json& j, const std::string& context) {
    io::reject_unknown_keys(
        j, {"stiffness", "damping", "coulomb_friction", "viscous_friction", "inertia"}, context);
    sysid::ActuatorParams p;
    p.stiffness = require_number(j, "stiffness", context);
    p.damping = require_number(j, "damping", context);
    p.coulomb_friction = require_number(j, "coulomb_friction", context);
    p.viscous_friction = require_number(j, "viscous_friction", context);
    p.inertia = require_number(j, "inertia", context);
    return p;
}

json params_to_json(const sysid::ActuatorParams& p) {
    json j;
    j["stiffness"] = p.stiffness;
    j["damping"] = p.damping;
    j["coulomb_friction"] = p.coulomb_friction;
    j["viscous_friction"] = p.viscous_friction;
    j["inertia"] = p.inertia;
    return j;
}

std::string probe_kind_name(sysid::ProbeSequence::Kind kind) {
    switch (kind) {
        case sysid::ProbeSequence::Kind::Step: return "step";
        case sysid::ProbeSequence::Kind::Ramp: return "ramp";
        case sysid::ProbeSequence::Kind::Chirp: return "chirp";
    }
    return "unknown";
}

}  // namespace

int run_sysid(const json& config, int threads) {
    (void)threads;
    io::reject_unknown_keys(config,
                            {"seed", "output_dir", "dt", "budget", "initial_points", "candidates",
                             "mode", "gp_length_scale", "gp_noise", "ei_xi", "bounds", "probes",
                             "reference"},
                            "sysid");
    const std::string output_dir = require_string(config, "output_dir", "sysid");

    sysid::BoConfig cfg;
    cfg.seed = config.value("seed", std::uint64_t{0});
    cfg.dt = config.value("dt", 1e-3);
    cfg.budget = config.value("budget", 100);
    cfg.initial_points = config.value("initial_points", 2 * sysid::ActuatorParams::kDim);
    cfg.candidates = config.value("candidates", 2048);
    cfg.gp_length_scale = config.value("gp_length_scale", 0.3);
    cfg.gp_noise = config.value("gp_noise", 1e-6);
    cfg.ei_xi = config.value("ei_xi", 0.01);
    const std::string mode = config.value("mode", std::string("bo"));
    if (mode == "random") {
        cfg.random_search_only = true;
    } else if (mode != "bo") {
        throw SchemaError("sysid: mode must be 'bo' or 'random'");
    }

    const json& jb = config.at("bounds");
    io::reject_unknown_keys(
        jb, {"stiffness", "damping", "coulomb_friction", "viscous_friction", "inertia"},
        "sysid.bounds");
    sysid::ParamBounds bounds;
    Eigen::VectorXd lo(5), hi(5);
    const std::vector<std::string> names = {"stiffness", "damping", "coulomb_friction",
                                            "viscous_friction", "inertia"};
    for (int i = 0; i < 5; ++i) {
        const json& range = jb.at(names[i]);
        if (!range.is_array() || range.size() != 2) {
            throw SchemaError("sysid.bounds." + names[i] + ": expected [lo, hi]");
        }
        lo(i) = range[0].get<double>();
        hi(i) = range[1].get<double>();
    }
    bounds.lo = sysid::ActuatorParams::from_vector(lo);
    bounds.hi = sysid::ActuatorParams::from_vector(hi);
    try {
        bounds.validate();
    } catch (const Error& e) {
        throw SchemaError(std::string("sysid.bounds: ") + e.what());
    }

    std::vector<sysid::ProbeSequence> probes;
    for (const auto& jp : config.at("probes")) {
        io::reject_unknown_keys(
            jp, {"kind", "duration", "amplitude", "sample_rate", "chirp_f0", "chirp_f1"},
            "sysid.probes");
        sysid::ProbeSequence p;
        const std::string kind = require_string(jp, "kind", "sysid.probes");
        if (kind == "step") p.kind = sysid::ProbeSequence::Kind::Step;
        else if (kind == "ramp") p.kind = sysid::ProbeSequence::Kind::Ramp;
        else if (kind == "chirp") p.kind = sysid::ProbeSequence::Kind::Chirp;
        else throw SchemaError("sysid.probes: unknown kind '" + kind + "'");
        p.duration = require_number(jp, "duration", "sysid.probes");
        p.amplitude = require_number(jp, "amplitude", "sysid.probes");
        p.sample_rate = require_number(jp, "sample_rate", "sysid.probes");
        p.chirp_f0 = jp.value("chirp_f0", 0.5);
        p.chirp_f1 = jp.value("chirp_f1", 8.0);
        try {
            p.validate();
        } catch (const Error& e) {
            throw SchemaError(std::string("sysid.probes: ") + e.what());
        }
        probes.push_back(p);
    }
    if (probes.empty()) throw SchemaError("sysid: need at least one probe");

    // reference trajectories: either a hidden-parameter plant or files
    const json& jr = config.at("reference");
    std::vector<sysid::Trajectory> reference;
    if (jr.contains("true_params")) {
        io::reject_unknown_keys(jr, {"true_params", "noise_std"}, "sysid.reference");
        const sysid::ActuatorParams truth =
            params_from_json(jr.at("true_params"), "sysid.reference.true_params");
        try {
            truth.validate();
        } catch (const Error& e) {
            throw SchemaError(std::string("sysid.reference: ") + e.what());
        }
        const double noise_std = jr.value("noise_std", 0.0);
        Rng rng(cfg.seed + 1);
        for (const auto& p : probes) {
            sysid::Trajectory t = sysid::simulate_actuator(truth, p, cfg.dt);
            if (noise_std > 0.0) {
                for (auto& q : t.measured) q += noise_std * rng.gaussian();
            }
            reference.push_back(std::move(t));
        }
    } else if (jr.contains("trajectory_files")) {
        io::reject_unknown_keys(jr, {"trajectory_files"}, "sysid.reference");
        for (const auto& f : jr.at("trajectory_files")) {
            reference.push_back(io::load_trajectory_csv(f.get<std::string>()));
        }
        if (reference.size() != probes.size()) {
            throw SchemaError("sysid.reference: trajectory_files count must match probes");
        }
    } else {
        throw SchemaError("sysid.reference: need 'true_params' or 'trajectory_files'");
    }

    const sysid::BoResult result = sysid::bayes_opt_identify(reference, probes, bounds, cfg);

    fs::create_directories(output_dir);
    json best;
    best["params"] = params_to_json(result.best);
    best["best_mse"] = result.best_mse;
    best["evaluations"] = result.history.size();
    io::save_json_file(out_path(output_dir, "best_params.json"), best);

    std::string hist = "iter,stiffness,damping,coulomb_friction,viscous_friction,inertia,mse,"
                       "best_mse,unstable\n";
    for (size_t i = 0; i < result.history.size(); ++i) {
        const auto& h = result.history[i];
        const Eigen::VectorXd v = h.params.to_vector();
        hist += std::to_string(i);
        for (int k = 0; k < 5; ++k) hist += "," + io::format_double(v(k));
        hist += "," + io::format_double(h.mse) + "," + io::format_double(h.best_so_far) + "," +
                (h.unstable ? "1" : "0") + "\n";
    }
    io::write_text_file(out_path(output_dir, "history.csv"), hist);

    for (size_t p = 0; p < probes.size(); ++p) {
        const std::string stem =
            "probe_" + std::to_string(p) + "_" + probe_kind_name(probes[p].kind);
        io::save_trajectory_csv(out_path(output_dir, stem + "_reference.csv"), reference[p]);
        io::save_trajectory_csv(out_path(output_dir, stem + "_best.csv"),
                                sysid::simulate_actuator(result.best, probes[p], cfg.dt));
    }

    std::cout << "sysid: best mse " << io::format_double(result.best_mse) << "\n";
    return kExitOk;
}

// ---- probe -----------------------------------------------------------------------

int run_probe(const json& config, int threads) {
    (void)threads;
    io::reject_unknown_keys(config,
                            {"seed", "output_dir", "manifest_file", "ridge", "n_train", "pca_k",
                             "sc_times", "sc_stride"},
                            "probe");
    const std::string output_dir = require_string(config, "output_dir", "probe");
    const std::string manifest_path = require_string(config, "manifest_file", "probe");
    const double ridge = config.value("ridge", 1e-6);
    const int pca_k = config.value("pca_k", 2);
    if (pca_k < 1) throw SchemaError("probe: pca_k must be >= 1");

    const json jm = io::load_json_file(manifest_path);
    io::reject_unknown_keys(
        jm, {"dim_latent", "dim_target", "target_names", "trajectories"}, "probe manifest");
    const int dim_latent = jm.at("dim_latent").get<int>();
    const int dim_target = jm.at("dim_target").get<int>();
    if (pca_k > dim_latent) throw SchemaError("probe: pca_k exceeds the latent dimension");
    std::vector<std::string> target_names;
    if (jm.contains("target_names")) {
        target_names = jm.at("target_names").get<std::vector<std::string>>();
        if (static_cast<int>(target_names.size()) != dim_target) {
            throw SchemaError("probe manifest: target_names must hold dim_target entries");
        }
    } else {
        for (int i = 0; i < dim_target; ++i) target_names.push_back("target_" + std::to_string(i));
    }

    const fs::path base = fs::path(manifest_path).parent_path();
    probe::LatentTrajectorySet all;
    for (const auto& jt : jm.at("trajectories")) {
        io::reject_unknown_keys(jt, {"file", "label"}, "probe manifest trajectories");
        probe::LatentTrajectory traj = io::load_latent_trajectory_csv(
            (base / jt.at("file").get<std::string>()).string(), dim_latent, dim_target);
        traj.label = jt.at("label").get<std::string>();
        all.trajectories.push_back(std::move(traj));
    }
    try {
        all.validate();
    } catch (const Error& e) {
        throw SchemaError(std::string("probe: ") + e.what());
    }

    const int n_total = static_cast<int>(all.trajectories.size());
    const int n_train = config.value("n_train", (9 * n_total) / 10);
    if (n_train < 1 || n_train >= n_total) {
        throw SchemaError("probe: n_train must split off a non-empty train and test set");
    }
    probe::LatentTrajectorySet train, test;
    train.trajectories.assign(all.trajectories.begin(), all.trajectories.begin() + n_train);
    test.trajectories.assign(all.trajectories.begin() + n_train, all.trajectories.end());

    const Eigen::MatrixXd weights = probe::linear_probe_fit(train, ridge);
    const std::vector<probe::TargetScore> scores = probe::probe_score(weights, test);

    // silhouette sample times
    long min_len = all.trajectories[0].latents.rows();
    for (const auto& t : all.trajectories) min_len = std::min(min_len, t.latents.rows());
    std::vector<int> times;
    if (config.contains("sc_times")) {
        times = config.at("sc_times").get<std::vector<int>>();
    } else {
        const int stride = config.value("sc_stride", 10);
        for (int t = 0; t < min_len; t += stride) times.push_back(t);
        if (times.empty() || times.back() != min_len - 1) times.push_back(static_cast<int>(min_len) - 1);
    }

    std::vector<probe::TemporalClusterPoint> sc;
    bool single_cluster = false;
    try {
        sc = probe::temporal_cluster_report(all, times, pca_k);
    } catch (const SingleClusterError&) {
        single_cluster = true;  // reported in the JSON instead of failing the run
    }

    fs::create_directories(output_dir);
    json report;
    report["n_train"] = n_train;
    report["n_test"] = n_total - n_train;
    report["ridge"] = ridge;
    report["targets"] = json::array();
    for (int c = 0; c < dim_target; ++c) {
        json jt;
        jt["name"] = target_names[c];
        jt["rmse"] = scores[c].rmse;
        if (scores[c].r2_defined) {
            jt["r2"] = scores[c].r2;
        } else {
            jt["r2"] = nullptr;
        }
        report["targets"].push_back(jt);
    }
    report["single_cluster"] = single_cluster;
    io::save_json_file(out_path(output_dir, "probe_report.json"), report);

    // PCA scores over every step of every trajectory
    long total_rows = 0;
    for (const auto& t : all.trajectories) total_rows += t.latents.rows();
    Eigen::MatrixXd stacked(total_rows, dim_latent);
    long at = 0;
    for (const auto& t : all.trajectories) {
        stacked.block(at, 0, t.latents.rows(), dim_latent) = t.latents;
        at += t.latents.rows();
    }
    const probe::PcaResult pca = probe::pca_project(stacked, pca_k);
    std::string pca_csv = "trajectory,time";
    for (int k = 0; k < pca_k; ++k) pca_csv += ",score_" + std::to_string(k);
    pca_csv += ",label\n";
    at = 0;
    for (size_t tr = 0; tr < all.trajectories.size(); ++tr) {
        for (long r = 0; r < all.trajectories[tr].latents.rows(); ++r) {
            pca_csv += std::to_string(tr) + "," + std::to_string(r);
            for (int k = 0; k < pca_k; ++k) pca_csv += "," + io::format_double(pca.scores(at, k));
            pca_csv += "," + all.trajectories[tr].label + "\n";
            ++at;
        }
    }
    io::write_text_file(out_path(output_dir, "pca_scores.csv"), pca_csv);

    std::string sc_csv = "time,sc_pca,sc_full\n";
    for (const auto& point : sc) {
        sc_csv += std::to_string(point.time_index) + "," + io::format_double(point.sc_pca) + "," +
                  io::format_double(point.sc_full) + "\n";
    }
    io::write_text_file(out_path(output_dir, "sc_over_time.csv"), sc_csv);

    std::cout << "probe: wrote report for " << n_total << " trajectories\n";
    return kExitOk;
}

int run_subcommand(const std::string& name, const std::string& config_path,
                   const std::vector<std::string>& overrides, int threads) {
    try {
        const json config = load_config(config_path, overrides);
        if (name == "synth") return run_synth(config, threads);
        if (name == "calibrate") return run_calibrate(config, threads);
        if (name == "map") return run_map(config, threads);
        if (name == "sysid") return run_sysid(config, threads);
        if (name == "probe") return run_probe(config, threads);
        std::cerr << "unknown subcommand '" << name << "'\n";
        return kExitConfig;
    } catch (const SchemaError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const AllSamplesSkippedError& e) {
        std::cerr << "calibration degenerate: " << e.what() << "\n";
        return kExitCalibDegenerate;
    } catch (const UnstableError& e) {
        std::cerr << "sysid degenerate: " << e.what() << "\n";
        return kExitSysidDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace coptact::cli
