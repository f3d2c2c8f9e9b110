#ifndef OKID_OCCUPATION_HPP
#define OKID_OCCUPATION_HPP

#include <vector>

#include "okid/kernel.hpp"
#include "okid/trajectory.hpp"

namespace okid {

// Basis of M order-s control occupation kernels, one per trajectory.
struct OccupationBasis {
    std::vector<Trajectory> trajectories;
    int order = 1;
    KernelConfig kernel;
    QuadRule rule = QuadRule::Trapezoid;

    Eigen::Index size() const { return static_cast<Eigen::Index>(trajectories.size()); }
    Eigen::Index state_dim() const { return trajectories.empty() ? 0 : trajectories.front().state_dim(); }
    Eigen::Index control_dim() const { return trajectories.empty() ? 0 : trajectories.front().control_dim(); }

    // All trajectories share (n, m); order >= 1.
    void validate() const;
};

struct GramMatrix {
    Eigen::MatrixXd entries;  // M x M, symmetric
    double lambda = 0.0;
};

// <Gamma_i, Gamma_j>: double quadrature of
// w_i[a] w_j[b] (1 + u_i(t_a).u_j(t_b)) k(gamma_i(t_a), gamma_j(t_b)).
// Under the diagonal operator-valued kernel the (m+1)-dimensional inner
// product collapses to this scalar form.
double gram_entry(const OccupationBasis& basis, Eigen::Index i, Eigen::Index j);

// Upper triangle computed and mirrored; optional thread count (0 = serial).
GramMatrix gram_matrix(const OccupationBasis& basis, int threads = 0);

// gamma(T) - sum_{l=0}^{s-1} T^l/l! d^l gamma/dt^l (0).  The l=0 term is
// gamma(0); rows 1..s-1 come from traj.initial_derivatives.
Eigen::VectorXd target_vector(const Trajectory& traj, int order);

// Gamma_j(x): component 0 weights the drift, components 1..m the
// control-effectiveness columns.
Eigen::RowVectorXd occ_eval(const OccupationBasis& basis, Eigen::Index j,
                            const Eigen::VectorXd& x);

}  // namespace okid

#endif
