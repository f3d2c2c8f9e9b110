#ifndef OKID_TRAJECTORY_HPP
#define OKID_TRAJECTORY_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>

namespace okid {

// Uniformly sampled controlled trajectory.  Rows of `states` are samples of
// the position path gamma; rows of `controls` are samples of u (may be zero
// columns).  `initial_derivatives` row l-1 holds d^l gamma/dt^l at t=0,
// l = 1..s-1; empty for first order problems.
struct Trajectory {
    Eigen::VectorXd times;
    Eigen::MatrixXd states;
    Eigen::MatrixXd controls;
    Eigen::MatrixXd initial_derivatives;

    Eigen::Index samples() const { return times.size(); }
    Eigen::Index state_dim() const { return states.cols(); }
    Eigen::Index control_dim() const { return controls.cols(); }
    double horizon() const { return times(times.size() - 1) - times(0); }
    double dt() const { return (times(times.size() - 1) - times(0)) / double(times.size() - 1); }

    // N >= 3, uniform grid to 1e-9 relative, consistent row counts.
    void validate() const;
};

enum class QuadRule { Trapezoid, Simpson };

QuadRule parse_quad_rule(const std::string& name);
std::string quad_rule_name(QuadRule rule);

// Composite quadrature weights on a uniform N-point grid of spacing dt.
// Simpson requires odd N; for even N the final interval falls back to
// trapezoid.
Eigen::VectorXd quadrature_weights(Eigen::Index n, double dt, QuadRule rule);

// w_i = quad_i * (T - t_i)^(s-1) / (s-1)!, the discretized Cauchy
// iterated-integral weight of an order-s occupation functional.
Eigen::VectorXd cauchy_weights(const Trajectory& traj, int order, QuadRule rule);

// Order-2 forward differences on the leading samples; row l-1 estimates
// d^l gamma/dt^l (0) for l = 1..s-1.  Needs N >= 2s+1.
Eigen::MatrixXd estimate_initial_derivatives(const Trajectory& traj, int order);

// Same estimates from a least-squares polynomial of degree `order` over the
// first `window` samples (window = 0 means the whole trajectory); used for
// noisy data.
Eigen::MatrixXd smoothed_initial_derivatives(const Trajectory& traj, int order,
                                             Eigen::Index window = 0);

struct TrajectoryMeta {
    int order = 1;
    Eigen::MatrixXd init_derivs;  // 0 rows when absent
};

// CSV rows `t, x_1..x_n, u_1..u_m`.  A sidecar `<base>.meta.json`, when
// present, supplies `s` and optional `init_derivs` that override estimation.
Trajectory load_trajectory(const std::filesystem::path& path, Eigen::Index n,
                           Eigen::Index m);
std::optional<TrajectoryMeta> load_sidecar(const std::filesystem::path& csv_path);
void save_trajectory(const Trajectory& traj, const std::filesystem::path& path,
                     const std::optional<TrajectoryMeta>& meta = std::nullopt);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace okid

#endif
