#include "okid/control.hpp"

#include "okid/errors.hpp"
#include "okid/io.hpp"
#include "okid/simulate.hpp"

namespace okid {

ManipulatorTerms recover_manipulator_terms(const Prediction& pred) {
    if (pred.drift.size() != 4 || pred.effectiveness.rows() != 4 ||
        pred.effectiveness.cols() != 2)
        throw ConfigError("recover_manipulator_terms: expected a 4-state, 2-control model");
    const Eigen::Matrix2d inv_inertia = pred.effectiveness.bottomRows<2>();
    const Eigen::JacobiSVD<Eigen::Matrix2d> svd(inv_inertia);
    const double smin = svd.singularValues()(1);
    const double smax = svd.singularValues()(0);
    if (!(smin > 0.0) || smax / smin > 1e8)
        throw NumericalError("estimated inverse-inertia block is singular (condition " +
                             format_double(smin > 0.0 ? smax / smin : INFINITY) + ")");
    ManipulatorTerms terms;
    terms.inertia = inv_inertia.inverse();
    terms.coriolis = -terms.inertia * pred.drift.tail<2>();
    return terms;
}

ManipulatorTerms recover_manipulator_terms(const IdentifiedModel& model,
                                           const Eigen::Vector2d& q,
                                           const Eigen::Vector2d& qd) {
    Eigen::VectorXd x(4);
    x << q, qd;
    return recover_manipulator_terms(predict(model, x));
}

Eigen::Vector2d computed_torque(const ManipulatorTerms& terms, const Eigen::Vector2d& q,
                                const Eigen::Vector2d& qd, const Eigen::Matrix2d& kp,
                                const Eigen::Matrix2d& kv) {
    return terms.inertia * (-kv * qd - kp * q) + terms.coriolis;
}

ClosedLoopRecord simulate_closed_loop(const PlantSpec& plant, const TorqueLaw& law,
                                      const Eigen::VectorXd& x0, double horizon,
                                      double dt) {
    if (plant.order != 1 || plant.state_dim != 4 || plant.control_dim != 2)
        throw ConfigError("simulate_closed_loop expects the first-order two-link plant");
    const Eigen::Index steps = static_cast<Eigen::Index>(std::llround(horizon / dt));
    ClosedLoopRecord rec;
    rec.times.resize(steps + 1);
    rec.states.resize(steps + 1, 4);
    rec.torques.resize(steps + 1, 2);
    Eigen::VectorXd x = x0;
    for (Eigen::Index k = 0; k <= steps; ++k) {
        const Eigen::Vector2d tau = law(x);
        rec.times(k) = k * dt;
        rec.states.row(k) = x.transpose();
        rec.torques.row(k) = tau.transpose();
        if (!x.allFinite())
            throw NumericalError("closed loop diverged at step " + std::to_string(k));
        if (k == steps) break;
        auto deriv = [&](const Eigen::VectorXd& z) {
            return (plant.drift(z) + plant.effectiveness(z) * tau).eval();
        };
        const Eigen::VectorXd k1 = deriv(x);
        const Eigen::VectorXd k2 = deriv(x + (dt / 2.0) * k1);
        const Eigen::VectorXd k3 = deriv(x + (dt / 2.0) * k2);
        const Eigen::VectorXd k4 = deriv(x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return rec;
}

TorqueLaw exact_torque_law(const std::map<std::string, double>& params,
                           const Eigen::Matrix2d& kp, const Eigen::Matrix2d& kv) {
    return [params, kp, kv](const Eigen::VectorXd& x) {
        const Eigen::Vector2d q = x.head<2>();
        const Eigen::Vector2d qd = x.tail<2>();
        ManipulatorTerms terms;
        terms.inertia = twolink_inertia(q(1), params);
        terms.coriolis = twolink_coriolis(q, qd, params);
        return computed_torque(terms, q, qd, kp, kv);
    };
}

TorqueLaw estimated_torque_law(const IdentifiedModel& model, const Eigen::Matrix2d& kp,
                               const Eigen::Matrix2d& kv) {
    return [&model, kp, kv](const Eigen::VectorXd& x) {
        const Eigen::Vector2d q = x.head<2>();
        const Eigen::Vector2d qd = x.tail<2>();
        return computed_torque(recover_manipulator_terms(model, q, qd), q, qd, kp, kv);
    };
}

}  // namespace okid
