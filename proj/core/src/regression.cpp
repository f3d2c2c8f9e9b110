#include "okid/regression.hpp"

#include <chrono>
#include <json.hpp>

#include "okid/errors.hpp"
#include "okid/io.hpp"

namespace okid {

namespace {

constexpr int kModelFormatVersion = 1;

double spectral_norm_estimate(const Eigen::MatrixXd& a) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(a.rows()).normalized();
    double norm = 0.0;
    for (int it = 0; it < 30; ++it) {
        v = a * v;
        norm = v.norm();
        if (norm == 0.0) return 0.0;
        v /= norm;
    }
    return norm;
}

}  // namespace

Eigen::MatrixXd solve_ridge_system(const Eigen::MatrixXd& gram, double lambda,
                                   const Eigen::MatrixXd& targets, FitReport* report) {
    if (gram.rows() != gram.cols()) throw ConfigError("Gram matrix must be square");
    if (targets.rows() != gram.rows())
        throw ConfigError("target row count does not match Gram size");
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");

    // Quadrature round-off can leave ~1e-16 asymmetry; symmetrize first.
    Eigen::MatrixXd a = 0.5 * (gram + gram.transpose());
    a.diagonal().array() += lambda;

    Eigen::MatrixXd w;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
        w = llt.solve(targets);
    } else {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        if (ldlt.info() == Eigen::Success) {
            w = ldlt.solve(targets);
        } else {
            w = a.colPivHouseholderQr().solve(targets);
        }
    }

    const double bnorm = targets.norm();
    const double residual = (a * w - targets).norm();
    const double rel = bnorm > 0.0 ? residual / bnorm : residual;

    if (report) {
        const double amax = spectral_norm_estimate(a);
        report->condition_estimate = amax > 0.0 ? amax / lambda : 1.0;
        report->residual_relative = rel;
        report->basis_size = gram.rows();
    }
    if (!w.allFinite() || rel > 1e-8) {
        const double amax = spectral_norm_estimate(a);
        throw NumericalError(
            "ridge solve failed: relative residual " + format_double(rel) +
            ", condition estimate <= " + format_double(amax > 0.0 ? amax / lambda : 0.0));
    }
    return w;
}

IdentifiedModel fit(const OccupationBasis& basis, double lambda, int threads,
                    FitReport* report) {
    const auto t0 = std::chrono::steady_clock::now();
    basis.validate();
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    for (std::size_t j = 0; j < basis.trajectories.size(); ++j)
        if (basis.trajectories[j].initial_derivatives.rows() != basis.order - 1)
            throw ConfigError("trajectory " + std::to_string(j) +
                              " lacks initial derivatives for order " +
                              std::to_string(basis.order));

    const GramMatrix gram = gram_matrix(basis, threads);
    const Eigen::Index M = basis.size();
    Eigen::MatrixXd targets(M, basis.state_dim());
    for (Eigen::Index j = 0; j < M; ++j)
        targets.row(j) = target_vector(basis.trajectories[j], basis.order).transpose();

    IdentifiedModel model;
    model.basis = basis;
    model.lambda = lambda;
    model.weights = solve_ridge_system(gram.entries, lambda, targets, report);
    if (report)
        report->wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return model;
}

Prediction predict(const IdentifiedModel& model, const Eigen::VectorXd& x) {
    auto batch = predict_batch(model, x.transpose());
    return std::move(batch.front());
}

std::vector<Prediction> predict_batch(const IdentifiedModel& model,
                                      const Eigen::MatrixXd& X) {
    const Eigen::Index p = X.rows();
    std::vector<Prediction> out;
    if (p == 0) return out;
    model.basis.validate();
    const Eigen::Index n = model.basis.state_dim();
    const Eigen::Index m = model.basis.control_dim();
    if (X.cols() != n) throw ConfigError("predict: query dimension mismatch");
    if (model.weights.rows() != model.basis.size() || model.weights.cols() != n)
        throw ConfigError("predict: weight matrix shape mismatch");

    // Accumulate sum_j w_j Gamma_j(x) componentwise: one trajectory-vs-query
    // cross-kernel matrix per basis element, shared over all queries.
    Eigen::MatrixXd drift = Eigen::MatrixXd::Zero(n, p);
    std::vector<Eigen::MatrixXd> eff(m, Eigen::MatrixXd::Zero(n, p));
    for (Eigen::Index j = 0; j < model.basis.size(); ++j) {
        const Trajectory& traj = model.basis.trajectories[j];
        const Eigen::VectorXd w = cauchy_weights(traj, model.basis.order, model.basis.rule);
        const Eigen::MatrixXd K = kernel_cross_matrix(model.basis.kernel, traj.states, X);
        const Eigen::VectorXd wj = model.weights.row(j).transpose();
        drift.noalias() += wj * (w.transpose() * K);
        for (Eigen::Index c = 0; c < m; ++c)
            eff[c].noalias() += wj * (w.cwiseProduct(traj.controls.col(c)).transpose() * K);
    }

    out.resize(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        out[i].drift = drift.col(i);
        out[i].effectiveness.resize(n, m);
        for (Eigen::Index c = 0; c < m; ++c) out[i].effectiveness.col(c) = eff[c].col(i);
    }
    return out;
}

void save_model(const IdentifiedModel& model, const std::filesystem::path& path) {
    nlohmann::json j;
    j["version"] = kModelFormatVersion;
    j["kernel"] = {{"family", kernel_family_name(model.basis.kernel.family)},
                   {"shape", model.basis.kernel.shape}};
    j["s"] = model.basis.order;
    j["lambda"] = model.lambda;
    j["quadrature"] = quad_rule_name(model.basis.rule);
    j["n"] = model.basis.state_dim();
    j["m"] = model.basis.control_dim();

    nlohmann::json weights = nlohmann::json::array();
    for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < model.weights.cols(); ++c)
            row.push_back(model.weights(r, c));
        weights.push_back(row);
    }
    j["weights"] = weights;

    nlohmann::json trajs = nlohmann::json::array();
    for (const auto& traj : model.basis.trajectories) {
        nlohmann::json t;
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < traj.samples(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            row.push_back(traj.times(i));
            for (Eigen::Index c = 0; c < traj.state_dim(); ++c)
                row.push_back(traj.states(i, c));
            for (Eigen::Index c = 0; c < traj.control_dim(); ++c)
                row.push_back(traj.controls(i, c));
            rows.push_back(row);
        }
        t["rows"] = rows;
        nlohmann::json derivs = nlohmann::json::array();
        for (Eigen::Index r = 0; r < traj.initial_derivatives.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < traj.initial_derivatives.cols(); ++c)
                row.push_back(traj.initial_derivatives(r, c));
            derivs.push_back(row);
        }
        t["init_derivs"] = derivs;
        trajs.push_back(t);
    }
    j["trajectories"] = trajs;
    write_text_atomic(path, j.dump() + "\n");
}

IdentifiedModel load_model(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    try {
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion)
            throw IoError(path.string() + ": unsupported model format version " +
                          std::to_string(version));
        IdentifiedModel model;
        model.basis.kernel.family =
            parse_kernel_family(j.at("kernel").at("family").get<std::string>());
        model.basis.kernel.shape = j.at("kernel").at("shape").get<double>();
        model.basis.order = j.at("s").get<int>();
        model.lambda = j.at("lambda").get<double>();
        model.basis.rule = parse_quad_rule(j.at("quadrature").get<std::string>());
        const Eigen::Index n = j.at("n").get<Eigen::Index>();
        const Eigen::Index m = j.at("m").get<Eigen::Index>();

        const auto& weights = j.at("weights");
        model.weights.resize(weights.size(), n);
        for (std::size_t r = 0; r < weights.size(); ++r) {
            if (weights[r].size() != static_cast<std::size_t>(n))
                throw IoError(path.string() + ": weight row size mismatch");
            for (Eigen::Index c = 0; c < n; ++c)
                model.weights(r, c) = weights[r][c].get<double>();
        }

        for (const auto& t : j.at("trajectories")) {
            const auto& rows = t.at("rows");
            Trajectory traj;
            const Eigen::Index N = static_cast<Eigen::Index>(rows.size());
            traj.times.resize(N);
            traj.states.resize(N, n);
            traj.controls.resize(N, m);
            for (Eigen::Index i = 0; i < N; ++i) {
                const auto& row = rows[i];
                if (row.size() != static_cast<std::size_t>(1 + n + m))
                    throw IoError(path.string() + ": trajectory row size mismatch");
                traj.times(i) = row[0].get<double>();
                for (Eigen::Index c = 0; c < n; ++c) traj.states(i, c) = row[1 + c].get<double>();
                for (Eigen::Index c = 0; c < m; ++c)
                    traj.controls(i, c) = row[1 + n + c].get<double>();
            }
            const auto& derivs = t.at("init_derivs");
            traj.initial_derivatives.resize(derivs.size(), n);
            for (std::size_t r = 0; r < derivs.size(); ++r)
                for (Eigen::Index c = 0; c < n; ++c)
                    traj.initial_derivatives(r, c) = derivs[r][c].get<double>();
            traj.validate();
            model.basis.trajectories.push_back(std::move(traj));
        }
        if (model.weights.rows() != model.basis.size())
            throw IoError(path.string() + ": weight count does not match basis size");
        model.basis.validate();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace okid
