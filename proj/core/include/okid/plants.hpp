#ifndef OKID_PLANTS_HPP
#define OKID_PLANTS_HPP

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>

namespace okid {

// Analytic benchmark plant d^s x/dt^s = f(x) + g(x) u.  Drift and
// effectiveness take the position state x (R^n).
struct PlantSpec {
    std::string name;
    int order = 1;
    Eigen::Index state_dim = 0;
    Eigen::Index control_dim = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> drift;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> effectiveness;
    std::map<std::string, double> params;
};

// xdd = (x - x^3) + (2 + sin x) u; s=2, n=1, m=1.
PlantSpec make_duffing_plant();

// Two-link manipulator in first-order 4D form, state (q1, q2, qd1, qd2),
// controls (tau1, tau2); s=1, n=4, m=2.
PlantSpec make_twolink_plant();

PlantSpec make_plant(const std::string& name,
                     const std::map<std::string, double>& param_overrides = {});

// Two-link building blocks, shared with the computed-torque controller.
Eigen::Matrix2d twolink_inertia(double q2,
                                const std::map<std::string, double>& params);
Eigen::Vector2d twolink_coriolis(const Eigen::Vector2d& q, const Eigen::Vector2d& qd,
                                 const std::map<std::string, double>& params);

std::map<std::string, double> twolink_default_params();

}  // namespace okid

#endif
