#include "okid/simulate.hpp"

#include <cmath>

#include "okid/errors.hpp"
#include "okid/io.hpp"
#include "okid/rng.hpp"

namespace okid {

Trajectory rk4_simulate(const PlantSpec& plant, const ControlSignal& u,
                        const Eigen::VectorXd& x0, double horizon, double dt) {
    const int s = plant.order;
    const Eigen::Index n = plant.state_dim;
    const Eigen::Index m = plant.control_dim;
    if (s < 1) throw ConfigError("plant order must be >= 1");
    if (x0.size() != s * n)
        throw ConfigError("rk4_simulate: x0 must stack " + std::to_string(s) +
                          " derivative blocks of dimension " + std::to_string(n));
    if (!(dt > 0.0) || !(horizon > 0.0)) throw ConfigError("horizon and dt must be positive");
    const double steps_real = horizon / dt;
    const Eigen::Index steps = static_cast<Eigen::Index>(std::llround(steps_real));
    if (std::abs(steps_real - double(steps)) > 1e-9 * steps_real)
        throw ConfigError("dt must divide the horizon");

    // first-order augmentation: dz_k = z_{k+1}, dz_{s-1} = f(z_0) + g(z_0) u
    auto deriv = [&](const Eigen::VectorXd& z, double t) {
        Eigen::VectorXd dz(s * n);
        for (int k = 0; k + 1 < s; ++k) dz.segment(k * n, n) = z.segment((k + 1) * n, n);
        const Eigen::VectorXd pos = z.head(n);
        Eigen::VectorXd top = plant.drift(pos);
        if (m > 0) top += plant.effectiveness(pos) * u(t);
        dz.tail(n) = top;
        return dz;
    };

    Trajectory traj;
    traj.times.resize(steps + 1);
    traj.states.resize(steps + 1, n);
    traj.controls.resize(steps + 1, m);
    Eigen::VectorXd z = x0;
    for (Eigen::Index k = 0; k <= steps; ++k) {
        const double t = k * dt;
        traj.times(k) = t;
        traj.states.row(k) = z.head(n).transpose();
        if (m > 0) traj.controls.row(k) = u(t).transpose();
        if (!z.allFinite())
            throw NumericalError("rk4_simulate: non-finite state at step " + std::to_string(k));
        if (k == steps) break;
        const Eigen::VectorXd k1 = deriv(z, t);
        const Eigen::VectorXd k2 = deriv(z + (dt / 2.0) * k1, t + dt / 2.0);
        const Eigen::VectorXd k3 = deriv(z + (dt / 2.0) * k2, t + dt / 2.0);
        const Eigen::VectorXd k4 = deriv(z + dt * k3, t + dt);
        z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    traj.initial_derivatives.resize(s - 1, n);
    for (int l = 1; l < s; ++l)
        traj.initial_derivatives.row(l - 1) = x0.segment(l * n, n).transpose();
    return traj;
}

void ExcitationSpec::validate() const {
    if (num_terms < 0) throw ConfigError("excitation num_terms must be >= 0");
    if (amplitude_hi < amplitude_lo || frequency_hi < frequency_lo || phase_hi < phase_lo)
        throw ConfigError("excitation ranges must be nonempty");
}

ControlSignal excitation_signal(const ExcitationSpec& spec, Eigen::Index channels,
                                std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    Eigen::MatrixXd amp(channels, spec.num_terms);
    Eigen::MatrixXd freq(channels, spec.num_terms);
    Eigen::MatrixXd phase(channels, spec.num_terms);
    for (Eigen::Index c = 0; c < channels; ++c)
        for (int k = 0; k < spec.num_terms; ++k) {
            amp(c, k) = rng.uniform(spec.amplitude_lo, spec.amplitude_hi);
            freq(c, k) = rng.uniform(spec.frequency_lo, spec.frequency_hi);
            phase(c, k) = rng.uniform(spec.phase_lo, spec.phase_hi);
        }
    return [amp, freq, phase, channels](double t) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(channels);
        for (Eigen::Index c = 0; c < channels; ++c)
            for (Eigen::Index k = 0; k < amp.cols(); ++k)
                u(c) += amp(c, k) * std::sin(freq(c, k) * t + phase(c, k));
        return u;
    };
}

namespace {

std::vector<int> first_primes(Eigen::Index count) {
    std::vector<int> primes;
    for (int candidate = 2; static_cast<Eigen::Index>(primes.size()) < count; ++candidate) {
        bool ok = true;
        for (int p : primes) {
            if (p * p > candidate) break;
            if (candidate % p == 0) { ok = false; break; }
        }
        if (ok) primes.push_back(candidate);
    }
    return primes;
}

double radical_inverse(std::uint64_t index, int base) {
    double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

}  // namespace

Eigen::MatrixXd halton_points(Eigen::Index dim, Eigen::Index count,
                              const Eigen::VectorXd& center, double side,
                              Eigen::Index start_index) {
    if (count <= 0) throw ConfigError("halton_points: count must be positive");
    if (dim <= 0) throw ConfigError("halton_points: dim must be positive");
    if (center.size() != dim) throw ConfigError("halton_points: center dimension mismatch");
    const auto primes = first_primes(dim);
    Eigen::MatrixXd pts(count, dim);
    for (Eigen::Index i = 0; i < count; ++i)
        for (Eigen::Index d = 0; d < dim; ++d)
            pts(i, d) = center(d) +
                        side * (radical_inverse(start_index + i, primes[d]) - 0.5);
    return pts;
}

Trajectory add_noise(const Trajectory& traj, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw ConfigError("noise sigma must be nonnegative");
    Trajectory noisy = traj;
    if (sigma == 0.0) return noisy;
    Rng rng(seed);
    for (Eigen::Index i = 0; i < noisy.states.rows(); ++i)
        for (Eigen::Index c = 0; c < noisy.states.cols(); ++c)
            noisy.states(i, c) += sigma * rng.normal();
    return noisy;
}

}  // namespace okid
