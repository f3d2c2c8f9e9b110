#ifndef OKID_EXPERIMENT_HPP
#define OKID_EXPERIMENT_HPP

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "okid/control.hpp"
#include "okid/regression.hpp"
#include "okid/simulate.hpp"

namespace okid {

struct InitSampling {
    enum class Type { Grid, Halton } type = Type::Grid;
    // grid: per-dimension bounds over the full initial state (s*n dims)
    std::vector<std::pair<double, double>> bounds;
    // halton: cube center and side
    Eigen::VectorXd center;
    double side = 0.0;
};

struct ProbeSpec {
    enum class Type { Grid, Halton } type = Type::Grid;
    std::vector<std::pair<double, double>> bounds;  // grid (1-D only)
    Eigen::VectorXd center;                         // halton
    double side = 0.0;
    Eigen::Index count = 100;
};

struct DataConfig {
    Eigen::Index num_trajectories = 0;
    double horizon = 0.0;
    double dt = 0.0;
    ExcitationSpec excitation;
    double noise_sigma = 0.0;
    InitSampling init_sampling;
};

struct ModelConfig {
    KernelConfig kernel;
    double lambda = 0.0;
    int order = 1;
    QuadRule rule = QuadRule::Trapezoid;
    bool smooth_init_derivs = false;
    Eigen::Index smooth_window = 0;  // 0 = whole trajectory
};

struct ControlConfig {
    double kp = 20.0;
    double kv = 30.0;
    double horizon = 5.0;
    double dt = 1e-3;
    Eigen::VectorXd x0;  // defaults to (1, -1, 0, 0)
};

struct ExperimentConfig {
    std::string plant_name;
    std::map<std::string, double> plant_params;
    DataConfig data;
    ModelConfig model;
    ProbeSpec probes;
    ControlConfig control;
    std::uint64_t seed = 0;
    std::string output_dir = "out";

    PlantSpec plant() const;
    void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Loads a config file and applies `key.path=value` overrides.
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

// ---- pipeline pieces shared by CLI commands, Monte-Carlo, and tests ----

// Simulates the configured trajectory set (excitation + measurement noise),
// deterministically derived from `seed`.  Initial-derivative rows are left
// empty; prepare_basis fills them per the model config.
std::vector<Trajectory> generate_trajectories(const ExperimentConfig& cfg,
                                              std::uint64_t seed);

// Attaches initial derivatives (sidecar values when present, otherwise
// estimated) and bundles the basis.
OccupationBasis prepare_basis(const ExperimentConfig& cfg,
                              std::vector<Trajectory> trajectories);

Eigen::MatrixXd make_probes(const ExperimentConfig& cfg);

// Per-probe evaluation against the analytic plant.
struct EvalResult {
    Eigen::MatrixXd probes;        // count x n, halton probes sorted by
                                   // decreasing distance from the origin
    Eigen::VectorXd f_norm, f_err; // ||f||, ||f - fhat||
    Eigen::MatrixXd g_norm, g_err; // count x m, per effectiveness column
};

using Predictor = std::function<Prediction(const Eigen::VectorXd&)>;

EvalResult evaluate_predictor(const ExperimentConfig& cfg, const Predictor& predictor);
Predictor model_predictor(const IdentifiedModel& model);
Predictor plant_predictor(const PlantSpec& plant);

// ---- CLI commands ----

void run_generate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

IdentifiedModel run_identify(const ExperimentConfig& cfg,
                             const std::filesystem::path& data_dir,
                             const std::filesystem::path& out_dir, int threads = 0);

void run_evaluate(const ExperimentConfig& cfg, const IdentifiedModel& model,
                  const std::filesystem::path& out_dir);

struct MonteCarloRow {
    int trial = 0;
    std::uint64_t seed = 0;
    double mean_f_err = 0.0;
    Eigen::VectorXd mean_g_err;
};

std::vector<MonteCarloRow> run_montecarlo(const ExperimentConfig& cfg, int trials,
                                          const std::filesystem::path& out_dir,
                                          int threads = 0);

void run_control_demo(const ExperimentConfig& cfg,
                      const std::optional<IdentifiedModel>& model,
                      const std::filesystem::path& out_dir);

}  // namespace okid

#endif
