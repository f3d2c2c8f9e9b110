#ifndef OKID_CONTROL_HPP
#define OKID_CONTROL_HPP

#include "okid/plants.hpp"
#include "okid/regression.hpp"

namespace okid {

struct ManipulatorTerms {
    Eigen::Matrix2d inertia;   // Mhat(q)
    Eigen::Vector2d coriolis;  // Chat(q, qd)
};

// Reads the manipulator structure out of an identified first-order model at
// x = (q, qd): the bottom 2x2 block of ghat estimates inv(M), inverted to
// Mhat; Chat = -Mhat * (bottom two rows of fhat).  Throws NumericalError when
// the ghat block's condition exceeds 1e8.
ManipulatorTerms recover_manipulator_terms(const IdentifiedModel& model,
                                           const Eigen::Vector2d& q,
                                           const Eigen::Vector2d& qd);
ManipulatorTerms recover_manipulator_terms(const Prediction& pred);

// tau = Mhat (-Kv qd - Kp q) + Chat
Eigen::Vector2d computed_torque(const ManipulatorTerms& terms, const Eigen::Vector2d& q,
                                const Eigen::Vector2d& qd, const Eigen::Matrix2d& kp,
                                const Eigen::Matrix2d& kv);

// State feedback tau(x); evaluated once per step (zero-order hold).
using TorqueLaw = std::function<Eigen::Vector2d(const Eigen::VectorXd&)>;

struct ClosedLoopRecord {
    Eigen::VectorXd times;
    Eigen::MatrixXd states;   // N x 4, (q1, q2, qd1, qd2)
    Eigen::MatrixXd torques;  // N x 2
};

// Simulates the true two-link plant under the given torque law with RK4.
ClosedLoopRecord simulate_closed_loop(const PlantSpec& plant, const TorqueLaw& law,
                                      const Eigen::VectorXd& x0, double horizon,
                                      double dt);

// Exact-model computed-torque law for the given plant parameters.
TorqueLaw exact_torque_law(const std::map<std::string, double>& params,
                           const Eigen::Matrix2d& kp, const Eigen::Matrix2d& kv);

// Computed-torque law built from an identified model.
TorqueLaw estimated_torque_law(const IdentifiedModel& model, const Eigen::Matrix2d& kp,
                               const Eigen::Matrix2d& kv);

}  // namespace okid

#endif
