#ifndef OKID_SIMULATE_HPP
#define OKID_SIMULATE_HPP

#include <cstdint>
#include <functional>

#include "okid/plants.hpp"
#include "okid/trajectory.hpp"

namespace okid {

using ControlSignal = std::function<Eigen::VectorXd(double)>;

// Classical fixed-step RK4 on the first-order augmentation of an order-s
// plant.  x0 stacks (gamma, dgamma/dt, ..., d^{s-1}gamma/dt^{s-1}), size s*n.
// The returned trajectory records position samples only; initial_derivatives
// come from x0.  Throws NumericalError on a non-finite state.
Trajectory rk4_simulate(const PlantSpec& plant, const ControlSignal& u,
                        const Eigen::VectorXd& x0, double horizon, double dt);

// Per-channel sum of `num_terms` sinusoids with amplitudes, frequencies, and
// phases drawn uniformly from the configured ranges.
struct ExcitationSpec {
    int num_terms = 3;
    double amplitude_lo = -1.0, amplitude_hi = 1.0;
    double frequency_lo = 0.1, frequency_hi = 5.0;  // rad/s
    double phase_lo = 0.0, phase_hi = 2.0 * M_PI;

    void validate() const;
};

ControlSignal excitation_signal(const ExcitationSpec& spec, Eigen::Index channels,
                                std::uint64_t seed);

// Standard Halton sequence (bases = first `dim` primes, index from 1) mapped
// affinely onto the cube [center - side/2, center + side/2)^dim.
Eigen::MatrixXd halton_points(Eigen::Index dim, Eigen::Index count,
                              const Eigen::VectorXd& center, double side,
                              Eigen::Index start_index = 1);

// i.i.d. zero-mean Gaussian added to every state sample; controls untouched.
Trajectory add_noise(const Trajectory& traj, double sigma, std::uint64_t seed);

}  // namespace okid

#endif
