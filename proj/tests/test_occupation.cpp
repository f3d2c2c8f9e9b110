#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "okid/errors.hpp"
#include "okid/kernel.hpp"
#include "okid/occupation.hpp"
#include "okid/rng.hpp"

using okid::KernelConfig;
using okid::KernelFamily;
using okid::OccupationBasis;
using okid::QuadRule;
using okid::Trajectory;

namespace {

Trajectory constant_trajectory(const Eigen::VectorXd& state, double control,
                               double horizon, Eigen::Index samples) {
    Trajectory traj;
    traj.times = Eigen::VectorXd::LinSpaced(samples, 0.0, horizon);
    traj.states = state.transpose().replicate(samples, 1);
    traj.controls = Eigen::MatrixXd::Constant(samples, 1, control);
    traj.initial_derivatives.resize(0, state.size());
    return traj;
}

Trajectory wiggly_trajectory(okid::Rng& rng, Eigen::Index n, Eigen::Index m,
                             double horizon, Eigen::Index samples) {
    Trajectory traj;
    traj.times = Eigen::VectorXd::LinSpaced(samples, 0.0, horizon);
    traj.states.resize(samples, n);
    traj.controls.resize(samples, m);
    for (Eigen::Index c = 0; c < n; ++c) {
        const double a = rng.uniform(-1.5, 1.5);
        const double w = rng.uniform(0.5, 6.0);
        const double p = rng.uniform(0.0, 6.28);
        for (Eigen::Index i = 0; i < samples; ++i)
            traj.states(i, c) = a * std::sin(w * traj.times(i) + p);
    }
    for (Eigen::Index c = 0; c < m; ++c) {
        const double a = rng.uniform(-1.0, 1.0);
        const double w = rng.uniform(0.5, 6.0);
        for (Eigen::Index i = 0; i < samples; ++i)
            traj.controls(i, c) = a * std::cos(w * traj.times(i));
    }
    traj.initial_derivatives.resize(0, n);
    return traj;
}

OccupationBasis random_basis(std::uint64_t seed, Eigen::Index count,
                             Eigen::Index n, Eigen::Index m) {
    okid::Rng rng(seed);
    OccupationBasis basis;
    basis.order = 1;
    basis.kernel = {KernelFamily::Gaussian, 1.5};
    for (Eigen::Index i = 0; i < count; ++i)
        basis.trajectories.push_back(wiggly_trajectory(rng, n, m, 1.0, 41));
    return basis;
}

}  // namespace

TEST_CASE("constant trajectories with zero control give k(a,b)") {
    Eigen::VectorXd a(2), b(2);
    a << 0.4, -0.2;
    b << -1.0, 0.7;
    OccupationBasis basis;
    basis.order = 1;
    basis.kernel = {KernelFamily::Gaussian, 2.0};
    basis.trajectories = {constant_trajectory(a, 0.0, 1.0, 21),
                          constant_trajectory(b, 0.0, 1.0, 31)};
    const double expected = okid::kernel_eval(basis.kernel, a, b);
    CHECK(okid::gram_entry(basis, 0, 1) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("constant controls factor out as (1 + cd)") {
    Eigen::VectorXd a(1), b(1);
    a << 0.3;
    b << -0.8;
    const double c = 0.6, d = -1.1;
    OccupationBasis basis;
    basis.order = 1;
    basis.kernel = {KernelFamily::Gaussian, 1.0};
    basis.trajectories = {constant_trajectory(a, c, 1.0, 11),
                          constant_trajectory(b, d, 1.0, 17)};
    const double expected = (1.0 + c * d) * okid::kernel_eval(basis.kernel, a, b);
    CHECK(okid::gram_entry(basis, 0, 1) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("gram entries are symmetric on random trajectories") {
    const OccupationBasis basis = random_basis(21, 4, 2, 1);
    for (Eigen::Index i = 0; i < basis.size(); ++i)
        for (Eigen::Index j = i; j < basis.size(); ++j) {
            const double gij = okid::gram_entry(basis, i, j);
            const double gji = okid::gram_entry(basis, j, i);
            CHECK(std::abs(gij - gji) <= 1e-12 * std::abs(gij));
        }
}

TEST_CASE("single constant trajectory gives the 1x1 identity gram") {
    Eigen::VectorXd a(1);
    a << 0.9;
    OccupationBasis basis;
    basis.order = 1;
    basis.kernel = {KernelFamily::Gaussian, 3.0};
    basis.trajectories = {constant_trajectory(a, 0.0, 1.0, 9)};
    const okid::GramMatrix gram = okid::gram_matrix(basis);
    REQUIRE(gram.entries.rows() == 1);
    CHECK(gram.entries(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("gram matrix equals the entrywise loop") {
    const OccupationBasis basis = random_basis(5, 3, 2, 2);
    const okid::GramMatrix gram = okid::gram_matrix(basis);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) {
            const double oracle =
                okid::gram_entry(basis, std::min(i, j), std::max(i, j));
            CHECK(gram.entries(i, j) == doctest::Approx(oracle).epsilon(1e-14));
        }
}

TEST_CASE("gram matrix is positive semi-definite") {
    const OccupationBasis basis = random_basis(9, 6, 3, 1);
    const okid::GramMatrix gram = okid::gram_matrix(basis);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram.entries);
    const double max_eig = es.eigenvalues().maxCoeff();
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * max_eig);
}

TEST_CASE("gram assembly is identical across thread counts") {
    const OccupationBasis basis = random_basis(33, 5, 2, 1);
    const okid::GramMatrix serial = okid::gram_matrix(basis, 1);
    const okid::GramMatrix parallel = okid::gram_matrix(basis, 4);
    CHECK(serial.entries == parallel.entries);
}

TEST_CASE("target vector: first order is gamma(T) - gamma(0)") {
    okid::Rng rng(2);
    Trajectory traj = wiggly_trajectory(rng, 3, 1, 1.0, 25);
    const Eigen::VectorXd target = okid::target_vector(traj, 1);
    const Eigen::VectorXd expected =
        (traj.states.row(traj.samples() - 1) - traj.states.row(0)).transpose();
    CHECK((target - expected).norm() <= 1e-14);
}

TEST_CASE("target vector: quadratic position, zero initial velocity") {
    Trajectory traj;
    const Eigen::Index samples = 11;
    traj.times = Eigen::VectorXd::LinSpaced(samples, 0.0, 1.0);
    traj.states = (traj.times.array().square() / 2.0).matrix();
    traj.controls.resize(samples, 0);
    traj.initial_derivatives = Eigen::MatrixXd::Zero(1, 1);
    const Eigen::VectorXd target = okid::target_vector(traj, 2);
    CHECK(target(0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("target vector: sine position with unit initial velocity") {
    Trajectory traj;
    const Eigen::Index samples = 11;
    traj.times = Eigen::VectorXd::LinSpaced(samples, 0.0, 1.0);
    traj.states = traj.times.array().sin().matrix();
    traj.controls.resize(samples, 0);
    traj.initial_derivatives = Eigen::MatrixXd::Constant(1, 1, 1.0);
    const Eigen::VectorXd target = okid::target_vector(traj, 2);
    CHECK(target(0) == doctest::Approx(std::sin(1.0) - 1.0).epsilon(1e-10));
}

TEST_CASE("target vector requires the initial-derivative rows") {
    okid::Rng rng(4);
    Trajectory traj = wiggly_trajectory(rng, 1, 0, 1.0, 11);
    CHECK_THROWS_AS(okid::target_vector(traj, 2), okid::ConfigError);
}

TEST_CASE("occ_eval on a constant trajectory, first order") {
    Eigen::VectorXd x0(2), x(2);
    x0 << 0.1, -0.6;
    x << 1.2, 0.4;
    OccupationBasis basis;
    basis.order = 1;
    basis.kernel = {KernelFamily::Gaussian, 1.0};
    basis.trajectories = {constant_trajectory(x0, 0.0, 1.0, 13)};
    const Eigen::RowVectorXd v = okid::occ_eval(basis, 0, x);
    REQUIRE(v.size() == 2);
    CHECK(v(0) == doctest::Approx(okid::kernel_eval(basis.kernel, x0, x)).epsilon(1e-13));
    CHECK(v(1) == doctest::Approx(0.0));
}

TEST_CASE("occ_eval second order carries the T^2/2 Cauchy factor") {
    Eigen::VectorXd x0(1), x(1);
    x0 << 0.5;
    x << -0.25;
    const double horizon = 0.8;
    OccupationBasis basis;
    basis.order = 2;
    basis.kernel = {KernelFamily::Gaussian, 2.0};
    basis.trajectories = {constant_trajectory(x0, 0.0, horizon, 17)};
    const Eigen::RowVectorXd v = okid::occ_eval(basis, 0, x);
    const double expected =
        horizon * horizon / 2.0 * okid::kernel_eval(basis.kernel, x0, x);
    CHECK(v(0) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("reproducing self-consistency ties occ_eval to gram_entry") {
    const OccupationBasis basis = random_basis(13, 3, 2, 1);
    for (Eigen::Index i = 0; i < basis.size(); ++i)
        for (Eigen::Index j = 0; j < basis.size(); ++j) {
            const Trajectory& ti = basis.trajectories[std::size_t(i)];
            const Eigen::VectorXd w =
                okid::cauchy_weights(ti, basis.order, basis.rule);
            double acc = 0.0;
            for (Eigen::Index a = 0; a < ti.samples(); ++a) {
                const Eigen::RowVectorXd v =
                    okid::occ_eval(basis, j, ti.states.row(a).transpose());
                Eigen::RowVectorXd dir(1 + ti.control_dim());
                dir(0) = 1.0;
                dir.tail(ti.control_dim()) = ti.controls.row(a);
                acc += w(a) * dir.dot(v);
            }
            const double expected = okid::gram_entry(basis, i, j);
            CHECK(acc == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("first order with zero control reduces to the plain double quadrature") {
    okid::Rng rng(31);
    OccupationBasis basis;
    basis.order = 1;
    basis.kernel = {KernelFamily::Gaussian, 1.2};
    basis.trajectories = {wiggly_trajectory(rng, 2, 1, 1.0, 21),
                          wiggly_trajectory(rng, 2, 1, 1.0, 21)};
    for (auto& traj : basis.trajectories) traj.controls.setZero();
    const Trajectory& ti = basis.trajectories[0];
    const Trajectory& tj = basis.trajectories[1];
    const Eigen::VectorXd wi = okid::quadrature_weights(ti.samples(), ti.dt(), basis.rule);
    const Eigen::VectorXd wj = okid::quadrature_weights(tj.samples(), tj.dt(), basis.rule);
    double oracle = 0.0;
    for (Eigen::Index a = 0; a < ti.samples(); ++a)
        for (Eigen::Index b = 0; b < tj.samples(); ++b)
            oracle += wi(a) * wj(b) *
                      okid::kernel_eval(basis.kernel, ti.states.row(a).transpose(),
                                        tj.states.row(b).transpose());
    CHECK(okid::gram_entry(basis, 0, 1) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("mismatched dimensions and bad indices are rejected") {
    Eigen::VectorXd a(1), b2(2);
    a << 0.0;
    b2 << 0.0, 0.0;
    OccupationBasis basis;
    basis.order = 1;
    basis.kernel = {KernelFamily::Gaussian, 1.0};
    basis.trajectories = {constant_trajectory(a, 0.0, 1.0, 5),
                          constant_trajectory(b2, 0.0, 1.0, 5)};
    CHECK_THROWS_AS(basis.validate(), okid::ConfigError);
    basis.trajectories.pop_back();
    CHECK_THROWS_AS(okid::gram_entry(basis, 0, 1), okid::ConfigError);
    CHECK_THROWS_AS(okid::occ_eval(basis, 0, b2), okid::ConfigError);
}
