#include "okid/occupation.hpp"

#include "okid/errors.hpp"
#include "okid/parallel.hpp"

namespace okid {

void OccupationBasis::validate() const {
    if (order < 1) throw ConfigError("basis order must be >= 1");
    if (trajectories.empty()) throw ConfigError("basis needs at least one trajectory");
    kernel.validate();
    const Eigen::Index n = trajectories.front().state_dim();
    const Eigen::Index m = trajectories.front().control_dim();
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const auto& t = trajectories[i];
        if (t.state_dim() != n || t.control_dim() != m)
            throw ConfigError("trajectory " + std::to_string(i) +
                              " has mismatched dimensions");
    }
}

namespace {

double gram_entry_impl(const OccupationBasis& basis, Eigen::Index i, Eigen::Index j,
                       const Eigen::VectorXd& wi, const Eigen::VectorXd& wj) {
    const Trajectory& ti = basis.trajectories[i];
    const Trajectory& tj = basis.trajectories[j];
    const Eigen::MatrixXd K = kernel_cross_matrix(basis.kernel, ti.states, tj.states);
    // (1 + u_i.u_j) factor expanded into m+1 bilinear forms of K.
    double value = wi.dot(K * wj);
    for (Eigen::Index c = 0; c < ti.control_dim(); ++c) {
        const Eigen::VectorXd ai = wi.cwiseProduct(ti.controls.col(c));
        const Eigen::VectorXd aj = wj.cwiseProduct(tj.controls.col(c));
        value += ai.dot(K * aj);
    }
    return value;
}

}  // namespace

double gram_entry(const OccupationBasis& basis, Eigen::Index i, Eigen::Index j) {
    basis.validate();
    if (i < 0 || i >= basis.size() || j < 0 || j >= basis.size())
        throw ConfigError("gram_entry: index out of range");
    const Eigen::VectorXd wi = cauchy_weights(basis.trajectories[i], basis.order, basis.rule);
    const Eigen::VectorXd wj = cauchy_weights(basis.trajectories[j], basis.order, basis.rule);
    return gram_entry_impl(basis, i, j, wi, wj);
}

GramMatrix gram_matrix(const OccupationBasis& basis, int threads) {
    basis.validate();
    const Eigen::Index M = basis.size();
    std::vector<Eigen::VectorXd> w(M);
    for (Eigen::Index i = 0; i < M; ++i)
        w[i] = cauchy_weights(basis.trajectories[i], basis.order, basis.rule);

    // Upper triangle flattened into pair tasks; mirrored afterwards.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    pairs.reserve(static_cast<std::size_t>(M) * (M + 1) / 2);
    for (Eigen::Index i = 0; i < M; ++i)
        for (Eigen::Index j = i; j < M; ++j) pairs.emplace_back(i, j);

    GramMatrix gram;
    gram.entries.resize(M, M);
    parallel_for(pairs.size(), threads, [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        gram.entries(i, j) = gram_entry_impl(basis, i, j, w[i], w[j]);
    });
    for (Eigen::Index i = 0; i < M; ++i)
        for (Eigen::Index j = i + 1; j < M; ++j) gram.entries(j, i) = gram.entries(i, j);
    return gram;
}

Eigen::VectorXd target_vector(const Trajectory& traj, int order) {
    if (order < 1) throw ConfigError("order must be >= 1");
    if (traj.initial_derivatives.rows() != order - 1)
        throw ConfigError("target_vector: trajectory carries " +
                          std::to_string(traj.initial_derivatives.rows()) +
                          " initial-derivative rows, order " + std::to_string(order) +
                          " needs " + std::to_string(order - 1));
    const double T = traj.horizon();
    Eigen::VectorXd target =
        (traj.states.row(traj.samples() - 1) - traj.states.row(0)).transpose();
    double coef = 1.0;
    for (int l = 1; l < order; ++l) {
        coef *= T / l;  // T^l / l!
        target -= coef * traj.initial_derivatives.row(l - 1).transpose();
    }
    return target;
}

Eigen::RowVectorXd occ_eval(const OccupationBasis& basis, Eigen::Index j,
                            const Eigen::VectorXd& x) {
    basis.validate();
    if (j < 0 || j >= basis.size()) throw ConfigError("occ_eval: index out of range");
    const Trajectory& traj = basis.trajectories[j];
    if (x.size() != traj.state_dim())
        throw ConfigError("occ_eval: query dimension mismatch");
    const Eigen::VectorXd w = cauchy_weights(traj, basis.order, basis.rule);
    const Eigen::VectorXd k =
        kernel_cross_matrix(basis.kernel, traj.states, x.transpose()).col(0);
    Eigen::RowVectorXd out(traj.control_dim() + 1);
    out(0) = w.dot(k);
    for (Eigen::Index c = 0; c < traj.control_dim(); ++c)
        out(c + 1) = w.cwiseProduct(traj.controls.col(c)).dot(k);
    return out;
}

}  // namespace okid
