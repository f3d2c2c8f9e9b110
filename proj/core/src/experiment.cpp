#include "okid/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "okid/errors.hpp"
#include "okid/io.hpp"
#include "okid/parallel.hpp"
#include "okid/rng.hpp"

namespace okid {

namespace {

using nlohmann::json;

std::pair<double, double> parse_range(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError(what + " must be a [lo, hi] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

Eigen::VectorXd parse_vector(const json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

}  // namespace

PlantSpec ExperimentConfig::plant() const { return make_plant(plant_name, plant_params); }

void ExperimentConfig::validate() const {
    const PlantSpec spec = plant();
    if (data.num_trajectories <= 0) throw ConfigError("num_trajectories must be positive");
    if (!(data.horizon > 0.0) || !(data.dt > 0.0))
        throw ConfigError("data horizon and dt must be positive");
    if (data.noise_sigma < 0.0) throw ConfigError("noise_sigma must be nonnegative");
    data.excitation.validate();
    model.kernel.validate();
    if (!(model.lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (model.order < 1) throw ConfigError("model s must be >= 1");
    if (model.order != spec.order)
        throw ConfigError("model s=" + std::to_string(model.order) +
                          " does not match plant order " + std::to_string(spec.order));
    const Eigen::Index init_dim = spec.order * spec.state_dim;
    if (data.init_sampling.type == InitSampling::Type::Grid) {
        if (static_cast<Eigen::Index>(data.init_sampling.bounds.size()) != init_dim)
            throw ConfigError("grid init_sampling needs " + std::to_string(init_dim) +
                              " bound pairs");
    } else {
        if (data.init_sampling.center.size() != init_dim)
            throw ConfigError("halton init_sampling center needs dimension " +
                              std::to_string(init_dim));
        if (!(data.init_sampling.side > 0.0))
            throw ConfigError("halton init_sampling side must be positive");
    }
    if (probes.count <= 0) throw ConfigError("probe count must be positive");
    if (probes.type == ProbeSpec::Type::Grid) {
        if (probes.bounds.size() != 1 || spec.state_dim != 1)
            throw ConfigError("grid probes are supported for 1-D state spaces only");
    } else if (probes.center.size() != spec.state_dim) {
        throw ConfigError("halton probe center needs dimension " +
                          std::to_string(spec.state_dim));
    }
    if (control.x0.size() != 0 && control.x0.size() != init_dim)
        throw ConfigError("control x0 dimension mismatch");
}

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    try {
        const auto& plant = j.at("plant");
        cfg.plant_name = plant.at("name").get<std::string>();
        if (plant.contains("params"))
            for (const auto& [key, value] : plant.at("params").items())
                cfg.plant_params[key] = value.get<double>();

        const auto& data = j.at("data");
        cfg.data.num_trajectories = data.at("num_trajectories").get<Eigen::Index>();
        cfg.data.horizon = data.at("horizon").get<double>();
        cfg.data.dt = data.at("dt").get<double>();
        cfg.data.noise_sigma = data.value("noise_sigma", 0.0);
        if (data.contains("excitation")) {
            const auto& exc = data.at("excitation");
            cfg.data.excitation.num_terms = exc.value("num_terms", 3);
            auto [alo, ahi] = parse_range(exc.at("amplitude_range"), "amplitude_range");
            cfg.data.excitation.amplitude_lo = alo;
            cfg.data.excitation.amplitude_hi = ahi;
            auto [flo, fhi] = parse_range(exc.at("frequency_range"), "frequency_range");
            cfg.data.excitation.frequency_lo = flo;
            cfg.data.excitation.frequency_hi = fhi;
            if (exc.contains("phase_range")) {
                auto [plo, phi] = parse_range(exc.at("phase_range"), "phase_range");
                cfg.data.excitation.phase_lo = plo;
                cfg.data.excitation.phase_hi = phi;
            }
        }
        const auto& init = data.at("init_sampling");
        const std::string init_type = init.at("type").get<std::string>();
        if (init_type == "grid") {
            cfg.data.init_sampling.type = InitSampling::Type::Grid;
            for (const auto& b : init.at("bounds"))
                cfg.data.init_sampling.bounds.push_back(parse_range(b, "init bound"));
        } else if (init_type == "halton") {
            cfg.data.init_sampling.type = InitSampling::Type::Halton;
            cfg.data.init_sampling.center = parse_vector(init.at("center"));
            cfg.data.init_sampling.side = init.at("side").get<double>();
        } else {
            throw ConfigError("unknown init_sampling type '" + init_type + "'");
        }

        const auto& model = j.at("model");
        cfg.model.kernel.family =
            parse_kernel_family(model.at("kernel").at("family").get<std::string>());
        cfg.model.kernel.shape = model.at("kernel").at("shape").get<double>();
        cfg.model.lambda = model.at("lambda").get<double>();
        cfg.model.order = model.at("s").get<int>();
        cfg.model.rule = parse_quad_rule(model.value("quadrature", "trapezoid"));
        cfg.model.smooth_init_derivs = model.value("smooth_init_derivs", false);
        cfg.model.smooth_window = model.value("smooth_window", 0);

        const auto& eval = j.at("eval");
        const auto& probes = eval.at("probes");
        const std::string probe_type = probes.at("type").get<std::string>();
        if (probe_type == "grid") {
            cfg.probes.type = ProbeSpec::Type::Grid;
            for (const auto& b : probes.at("bounds"))
                cfg.probes.bounds.push_back(parse_range(b, "probe bound"));
        } else if (probe_type == "halton") {
            cfg.probes.type = ProbeSpec::Type::Halton;
            cfg.probes.center = parse_vector(probes.at("center"));
            cfg.probes.side = probes.at("side").get<double>();
        } else {
            throw ConfigError("unknown probe type '" + probe_type + "'");
        }
        cfg.probes.count = probes.value("count", 100);

        if (j.contains("control")) {
            const auto& ctl = j.at("control");
            cfg.control.kp = ctl.value("kp", 20.0);
            cfg.control.kv = ctl.value("kv", 30.0);
            cfg.control.horizon = ctl.value("horizon", 5.0);
            cfg.control.dt = ctl.value("dt", 1e-3);
            if (ctl.contains("x0")) cfg.control.x0 = parse_vector(ctl.at("x0"));
        }

        cfg.seed = j.value("seed", 0ULL);
        cfg.output_dir = j.value("output_dir", "out");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["plant"]["name"] = cfg.plant_name;
    if (!cfg.plant_params.empty()) {
        for (const auto& [key, value] : cfg.plant_params) j["plant"]["params"][key] = value;
    }
    j["data"]["num_trajectories"] = cfg.data.num_trajectories;
    j["data"]["horizon"] = cfg.data.horizon;
    j["data"]["dt"] = cfg.data.dt;
    j["data"]["noise_sigma"] = cfg.data.noise_sigma;
    j["data"]["excitation"] = {
        {"num_terms", cfg.data.excitation.num_terms},
        {"amplitude_range", {cfg.data.excitation.amplitude_lo, cfg.data.excitation.amplitude_hi}},
        {"frequency_range", {cfg.data.excitation.frequency_lo, cfg.data.excitation.frequency_hi}},
        {"phase_range", {cfg.data.excitation.phase_lo, cfg.data.excitation.phase_hi}}};
    if (cfg.data.init_sampling.type == InitSampling::Type::Grid) {
        json bounds = json::array();
        for (auto [lo, hi] : cfg.data.init_sampling.bounds) bounds.push_back({lo, hi});
        j["data"]["init_sampling"] = {{"type", "grid"}, {"bounds", bounds}};
    } else {
        j["data"]["init_sampling"] = {{"type", "halton"},
                                      {"center", vector_to_json(cfg.data.init_sampling.center)},
                                      {"side", cfg.data.init_sampling.side}};
    }
    j["model"]["kernel"] = {{"family", kernel_family_name(cfg.model.kernel.family)},
                            {"shape", cfg.model.kernel.shape}};
    j["model"]["lambda"] = cfg.model.lambda;
    j["model"]["s"] = cfg.model.order;
    j["model"]["quadrature"] = quad_rule_name(cfg.model.rule);
    j["model"]["smooth_init_derivs"] = cfg.model.smooth_init_derivs;
    j["model"]["smooth_window"] = cfg.model.smooth_window;
    if (cfg.probes.type == ProbeSpec::Type::Grid) {
        json bounds = json::array();
        for (auto [lo, hi] : cfg.probes.bounds) bounds.push_back({lo, hi});
        j["eval"]["probes"] = {{"type", "grid"}, {"bounds", bounds}, {"count", cfg.probes.count}};
    } else {
        j["eval"]["probes"] = {{"type", "halton"},
                               {"center", vector_to_json(cfg.probes.center)},
                               {"side", cfg.probes.side},
                               {"count", cfg.probes.count}};
    }
    j["control"] = {{"kp", cfg.control.kp},
                    {"kv", cfg.control.kv},
                    {"horizon", cfg.control.horizon},
                    {"dt", cfg.control.dt}};
    if (cfg.control.x0.size() > 0) j["control"]["x0"] = vector_to_json(cfg.control.x0);
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    for (const auto& entry : overrides) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override must look like key.path=value: '" + entry + "'");
        std::string pointer = "/" + entry.substr(0, eq);
        std::replace(pointer.begin(), pointer.end(), '.', '/');
        const std::string raw = entry.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::exception&) {
            value = raw;  // bare strings
        }
        try {
            j[json::json_pointer(pointer)] = value;
        } catch (const json::exception& e) {
            throw ConfigError("cannot apply override '" + entry + "': " + e.what());
        }
    }
    return parse_config(j);
}

// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd initial_conditions(const ExperimentConfig& cfg) {
    const PlantSpec plant = cfg.plant();
    const Eigen::Index dim = plant.order * plant.state_dim;
    const Eigen::Index count = cfg.data.num_trajectories;
    if (cfg.data.init_sampling.type == InitSampling::Type::Halton)
        return halton_points(dim, count, cfg.data.init_sampling.center,
                             cfg.data.init_sampling.side);
    // Uniform grid: count must be a perfect dim-th power.
    const Eigen::Index per_dim =
        static_cast<Eigen::Index>(std::llround(std::pow(double(count), 1.0 / double(dim))));
    Eigen::Index total = 1;
    for (Eigen::Index d = 0; d < dim; ++d) total *= per_dim;
    if (total != count)
        throw ConfigError("grid init_sampling: num_trajectories=" + std::to_string(count) +
                          " is not a perfect " + std::to_string(dim) + "-th power");
    Eigen::MatrixXd points(count, dim);
    for (Eigen::Index i = 0; i < count; ++i) {
        Eigen::Index rem = i;
        for (Eigen::Index d = 0; d < dim; ++d) {
            const Eigen::Index idx = rem % per_dim;
            rem /= per_dim;
            const auto [lo, hi] = cfg.data.init_sampling.bounds[d];
            points(i, d) =
                per_dim == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * double(idx) / double(per_dim - 1);
        }
    }
    return points;
}

}  // namespace

std::vector<Trajectory> generate_trajectories(const ExperimentConfig& cfg,
                                              std::uint64_t seed) {
    cfg.validate();
    const PlantSpec plant = cfg.plant();
    const Eigen::MatrixXd inits = initial_conditions(cfg);
    std::vector<Trajectory> out(cfg.data.num_trajectories);
    for (Eigen::Index i = 0; i < cfg.data.num_trajectories; ++i) {
        const ControlSignal u =
            excitation_signal(cfg.data.excitation, plant.control_dim, mix_seed(seed, 2 * i));
        Trajectory traj =
            rk4_simulate(plant, u, inits.row(i).transpose(), cfg.data.horizon, cfg.data.dt);
        traj = add_noise(traj, cfg.data.noise_sigma, mix_seed(seed, 2 * i + 1));
        // the identification stage estimates these from the (noisy) samples
        traj.initial_derivatives.resize(0, traj.state_dim());
        out[i] = std::move(traj);
    }
    return out;
}

OccupationBasis prepare_basis(const ExperimentConfig& cfg,
                              std::vector<Trajectory> trajectories) {
    const int s = cfg.model.order;
    for (auto& traj : trajectories) {
        if (traj.initial_derivatives.rows() == s - 1) continue;  // sidecar values
        traj.initial_derivatives =
            cfg.model.smooth_init_derivs
                ? smoothed_initial_derivatives(traj, s, cfg.model.smooth_window)
                : estimate_initial_derivatives(traj, s);
    }
    OccupationBasis basis;
    basis.trajectories = std::move(trajectories);
    basis.order = s;
    basis.kernel = cfg.model.kernel;
    basis.rule = cfg.model.rule;
    basis.validate();
    return basis;
}

Eigen::MatrixXd make_probes(const ExperimentConfig& cfg) {
    if (cfg.probes.type == ProbeSpec::Type::Grid) {
        const auto [lo, hi] = cfg.probes.bounds.front();
        Eigen::MatrixXd probes(cfg.probes.count, 1);
        for (Eigen::Index i = 0; i < cfg.probes.count; ++i)
            probes(i, 0) = lo + (hi - lo) * double(i) / double(cfg.probes.count - 1);
        return probes;
    }
    Eigen::MatrixXd probes =
        halton_points(cfg.probes.center.size(), cfg.probes.count, cfg.probes.center,
                      cfg.probes.side);
    // decreasing distance from the origin, stable for reproducibility
    std::vector<Eigen::Index> order(probes.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return probes.row(a).squaredNorm() > probes.row(b).squaredNorm();
    });
    Eigen::MatrixXd sorted(probes.rows(), probes.cols());
    for (Eigen::Index i = 0; i < probes.rows(); ++i) sorted.row(i) = probes.row(order[i]);
    return sorted;
}

Predictor model_predictor(const IdentifiedModel& model) {
    return [&model](const Eigen::VectorXd& x) { return predict(model, x); };
}

Predictor plant_predictor(const PlantSpec& plant) {
    return [plant](const Eigen::VectorXd& x) {
        Prediction pred;
        pred.drift = plant.drift(x);
        pred.effectiveness = plant.effectiveness(x);
        return pred;
    };
}

EvalResult evaluate_predictor(const ExperimentConfig& cfg, const Predictor& predictor) {
    const PlantSpec plant = cfg.plant();
    EvalResult result;
    result.probes = make_probes(cfg);
    const Eigen::Index count = result.probes.rows();
    const Eigen::Index m = plant.control_dim;
    result.f_norm.resize(count);
    result.f_err.resize(count);
    result.g_norm.resize(count, m);
    result.g_err.resize(count, m);
    for (Eigen::Index i = 0; i < count; ++i) {
        const Eigen::VectorXd x = result.probes.row(i).transpose();
        const Prediction pred = predictor(x);
        const Eigen::VectorXd f = plant.drift(x);
        const Eigen::MatrixXd g = plant.effectiveness(x);
        result.f_norm(i) = f.norm();
        result.f_err(i) = (pred.drift - f).norm();
        for (Eigen::Index c = 0; c < m; ++c) {
            result.g_norm(i, c) = g.col(c).norm();
            result.g_err(i, c) = (pred.effectiveness.col(c) - g.col(c)).norm();
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

void run_generate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    const auto trajectories = generate_trajectories(cfg, cfg.seed);
    const PlantSpec plant = cfg.plant();

    json manifest;
    manifest["plant"] = cfg.plant_name;
    manifest["n"] = plant.state_dim;
    manifest["m"] = plant.control_dim;
    manifest["s"] = plant.order;
    manifest["seed"] = cfg.seed;
    manifest["noise_sigma"] = cfg.data.noise_sigma;
    if (!plant.params.empty())
        for (const auto& [key, value] : plant.params) manifest["params"][key] = value;
    json files = json::array();

    TrajectoryMeta meta;
    meta.order = plant.order;
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "traj_%05zu.csv", i);
        save_trajectory(trajectories[i], out_dir / name, meta);
        files.push_back(name);
    }
    manifest["files"] = files;
    write_text_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

IdentifiedModel run_identify(const ExperimentConfig& cfg,
                             const std::filesystem::path& data_dir,
                             const std::filesystem::path& out_dir, int threads) {
    cfg.validate();
    json manifest;
    try {
        manifest = json::parse(read_text(data_dir / "manifest.json"));
    } catch (const json::exception& e) {
        throw IoError((data_dir / "manifest.json").string() + ": " + e.what());
    }
    const PlantSpec plant = cfg.plant();
    if (manifest.at("plant").get<std::string>() != cfg.plant_name)
        throw ConfigError("dataset plant '" + manifest.at("plant").get<std::string>() +
                          "' does not match config plant '" + cfg.plant_name + "'");
    if (manifest.at("s").get<int>() != cfg.model.order)
        throw ConfigError("dataset order s=" + std::to_string(manifest.at("s").get<int>()) +
                          " does not match config s=" + std::to_string(cfg.model.order));
    if (manifest.at("n").get<Eigen::Index>() != plant.state_dim ||
        manifest.at("m").get<Eigen::Index>() != plant.control_dim)
        throw ConfigError("dataset dimensions do not match the configured plant");

    std::vector<Trajectory> trajectories;
    for (const auto& file : manifest.at("files")) {
        const auto path = data_dir / file.get<std::string>();
        Trajectory traj = load_trajectory(path, plant.state_dim, plant.control_dim);
        if (const auto meta = load_sidecar(path); meta && meta->order != cfg.model.order)
            throw ConfigError(path.string() + ": sidecar s=" + std::to_string(meta->order) +
                              " does not match config s=" + std::to_string(cfg.model.order));
        trajectories.push_back(std::move(traj));
    }

    OccupationBasis basis = prepare_basis(cfg, std::move(trajectories));
    FitReport report;
    IdentifiedModel model = fit(basis, cfg.model.lambda, threads, &report);

    std::filesystem::create_directories(out_dir);
    save_model(model, out_dir / "model.json");
    json rj;
    rj["basis_size"] = report.basis_size;
    rj["condition_estimate"] = report.condition_estimate;
    rj["residual_relative"] = report.residual_relative;
    rj["wall_seconds"] = report.wall_seconds;
    write_text_atomic(out_dir / "fit_report.json", rj.dump(2) + "\n");
    return model;
}

namespace {

void write_eval_csvs(const ExperimentConfig& cfg, const EvalResult& result,
                     const std::filesystem::path& out_dir) {
    const Eigen::Index n = result.probes.cols();
    const Eigen::Index m = result.g_norm.cols();
    std::ostringstream out;
    out << "index,distance";
    for (Eigen::Index c = 0; c < n; ++c) out << ",x" << (c + 1);
    out << ",f_norm,f_err,f_rel";
    for (Eigen::Index c = 0; c < m; ++c)
        out << ",g" << (c + 1) << "_norm,g" << (c + 1) << "_err,g" << (c + 1) << "_rel";
    out << '\n';
    for (Eigen::Index i = 0; i < result.probes.rows(); ++i) {
        out << i << ',' << format_double(result.probes.row(i).norm());
        for (Eigen::Index c = 0; c < n; ++c) out << ',' << format_double(result.probes(i, c));
        out << ',' << format_double(result.f_norm(i)) << ',' << format_double(result.f_err(i))
            << ','
            << format_double(result.f_norm(i) > 0.0 ? result.f_err(i) / result.f_norm(i)
                                                    : result.f_err(i));
        for (Eigen::Index c = 0; c < m; ++c) {
            out << ',' << format_double(result.g_norm(i, c)) << ','
                << format_double(result.g_err(i, c)) << ','
                << format_double(result.g_norm(i, c) > 0.0
                                     ? result.g_err(i, c) / result.g_norm(i, c)
                                     : result.g_err(i, c));
        }
        out << '\n';
    }
    std::filesystem::create_directories(out_dir);
    write_text_atomic(out_dir / "errors.csv", out.str());
    (void)cfg;
}

}  // namespace

void run_evaluate(const ExperimentConfig& cfg, const IdentifiedModel& model,
                  const std::filesystem::path& out_dir) {
    cfg.validate();
    const PlantSpec plant = cfg.plant();
    if (model.basis.state_dim() != plant.state_dim ||
        model.basis.control_dim() != plant.control_dim ||
        model.basis.order != plant.order)
        throw ConfigError("model dimensions do not match the configured plant");

    // batch prediction shares kernel evaluations across probes
    const Eigen::MatrixXd probes = make_probes(cfg);
    const auto preds = predict_batch(model, probes);
    Eigen::Index next = 0;
    Predictor predictor = [&preds, &next](const Eigen::VectorXd&) {
        return preds[next++];
    };
    const EvalResult result = evaluate_predictor(cfg, predictor);
    write_eval_csvs(cfg, result, out_dir);
}

std::vector<MonteCarloRow> run_montecarlo(const ExperimentConfig& cfg, int trials,
                                          const std::filesystem::path& out_dir,
                                          int threads) {
    cfg.validate();
    if (trials <= 0) throw ConfigError("montecarlo: trials must be positive");
    const Eigen::Index m = cfg.plant().control_dim;
    std::vector<MonteCarloRow> rows(trials);
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = mix_seed(cfg.seed, 1000000 + t);
        auto trajectories = generate_trajectories(cfg, trial_seed);
        OccupationBasis basis = prepare_basis(cfg, std::move(trajectories));
        IdentifiedModel model = fit(basis, cfg.model.lambda, threads);
        const EvalResult result = evaluate_predictor(cfg, model_predictor(model));
        rows[t].trial = t;
        rows[t].seed = trial_seed;
        rows[t].mean_f_err = result.f_err.mean();
        rows[t].mean_g_err = result.g_err.colwise().mean().transpose();
    }

    std::ostringstream out;
    out << "trial,seed,mean_f_err";
    for (Eigen::Index c = 0; c < m; ++c) out << ",mean_g" << (c + 1) << "_err";
    out << '\n';
    for (const auto& row : rows) {
        out << row.trial << ',' << row.seed << ',' << format_double(row.mean_f_err);
        for (Eigen::Index c = 0; c < m; ++c) out << ',' << format_double(row.mean_g_err(c));
        out << '\n';
    }
    std::filesystem::create_directories(out_dir);
    write_text_atomic(out_dir / "trials.csv", out.str());

    auto stats = [&](auto accessor) {
        double mn = INFINITY, mx = -INFINITY, sum = 0.0, sq = 0.0;
        for (const auto& row : rows) {
            const double v = accessor(row);
            mn = std::min(mn, v);
            mx = std::max(mx, v);
            sum += v;
            sq += v * v;
        }
        const double mean = sum / trials;
        const double var = std::max(0.0, sq / trials - mean * mean);
        return std::array<double, 4>{mean, std::sqrt(var), mn, mx};
    };
    std::ostringstream summary;
    summary << "metric,mean,std,min,max\n";
    auto emit = [&](const std::string& name, const std::array<double, 4>& s) {
        summary << name;
        for (double v : s) summary << ',' << format_double(v);
        summary << '\n';
    };
    emit("mean_f_err", stats([](const MonteCarloRow& r) { return r.mean_f_err; }));
    for (Eigen::Index c = 0; c < m; ++c)
        emit("mean_g" + std::to_string(c + 1) + "_err",
             stats([c](const MonteCarloRow& r) { return r.mean_g_err(c); }));
    write_text_atomic(out_dir / "summary.csv", summary.str());
    return rows;
}

namespace {

void write_closed_loop_csv(const ClosedLoopRecord& rec, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "t,q1,q2,qd1,qd2,tau1,tau2\n";
    for (Eigen::Index i = 0; i < rec.times.size(); ++i) {
        out << format_double(rec.times(i));
        for (Eigen::Index c = 0; c < 4; ++c) out << ',' << format_double(rec.states(i, c));
        for (Eigen::Index c = 0; c < 2; ++c) out << ',' << format_double(rec.torques(i, c));
        out << '\n';
    }
    write_text_atomic(path, out.str());
}

}  // namespace

void run_control_demo(const ExperimentConfig& cfg,
                      const std::optional<IdentifiedModel>& model,
                      const std::filesystem::path& out_dir) {
    cfg.validate();
    const PlantSpec plant = cfg.plant();
    if (plant.name != "twolink")
        throw ConfigError("control-demo requires the twolink plant");
    Eigen::VectorXd x0 = cfg.control.x0;
    if (x0.size() == 0) {
        x0.resize(4);
        x0 << 1.0, -1.0, 0.0, 0.0;
    }
    const Eigen::Matrix2d kp = cfg.control.kp * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d kv = cfg.control.kv * Eigen::Matrix2d::Identity();

    std::filesystem::create_directories(out_dir);
    const auto exact = simulate_closed_loop(plant, exact_torque_law(plant.params, kp, kv),
                                            x0, cfg.control.horizon, cfg.control.dt);
    write_closed_loop_csv(exact, out_dir / "closed_loop_exact.csv");
    if (model) {
        if (model->basis.state_dim() != 4 || model->basis.control_dim() != 2 ||
            model->basis.order != 1)
            throw ConfigError("control-demo model must be a first-order 4-state, 2-control fit");
        const auto estimated =
            simulate_closed_loop(plant, estimated_torque_law(*model, kp, kv), x0,
                                 cfg.control.horizon, cfg.control.dt);
        write_closed_loop_csv(estimated, out_dir / "closed_loop_estimated.csv");
    }
}

}  // namespace okid
