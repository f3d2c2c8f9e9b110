#include "okid/trajectory.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "okid/errors.hpp"
#include "okid/io.hpp"

namespace okid {

void Trajectory::validate() const {
    const Eigen::Index n = times.size();
    if (n < 3) throw ConfigError("trajectory needs at least 3 samples, got " + std::to_string(n));
    if (states.rows() != n) throw ConfigError("state row count does not match time grid");
    if (controls.rows() != 0 && controls.rows() != n)
        throw ConfigError("control row count does not match time grid");
    const double step = dt();
    if (!(step > 0.0)) throw ConfigError("time grid must be strictly increasing");
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double d = times(i + 1) - times(i);
        if (std::abs(d - step) > 1e-9 * step)
            throw ConfigError("non-uniform time grid at sample " + std::to_string(i) +
                              " (step " + format_double(d) + ", expected " + format_double(step) + ")");
    }
}

QuadRule parse_quad_rule(const std::string& name) {
    if (name == "trapezoid") return QuadRule::Trapezoid;
    if (name == "simpson") return QuadRule::Simpson;
    throw ConfigError("unknown quadrature rule: '" + name + "'");
}

std::string quad_rule_name(QuadRule rule) {
    return rule == QuadRule::Trapezoid ? "trapezoid" : "simpson";
}

Eigen::VectorXd quadrature_weights(Eigen::Index n, double dt, QuadRule rule) {
    if (n < 2) throw ConfigError("quadrature needs at least 2 samples");
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    if (rule == QuadRule::Trapezoid) {
        w.setConstant(dt);
        w(0) = w(n - 1) = dt / 2.0;
        return w;
    }
    // Composite Simpson over an odd prefix; trapezoid on a trailing interval
    // when n is even.
    Eigen::Index last = (n % 2 == 1) ? n - 1 : n - 2;
    if (last >= 2) {
        for (Eigen::Index i = 0; i + 2 <= last; i += 2) {
            w(i) += dt / 3.0;
            w(i + 1) += 4.0 * dt / 3.0;
            w(i + 2) += dt / 3.0;
        }
    }
    if (n % 2 == 0) {
        w(n - 2) += dt / 2.0;
        w(n - 1) += dt / 2.0;
    }
    return w;
}

Eigen::VectorXd cauchy_weights(const Trajectory& traj, int order, QuadRule rule) {
    if (order < 1) throw ConfigError("order must be >= 1");
    const Eigen::Index n = traj.samples();
    Eigen::VectorXd w = quadrature_weights(n, traj.dt(), rule);
    if (order == 1) return w;
    double fact = 1.0;
    for (int l = 2; l < order; ++l) fact *= l;
    const double tend = traj.times(n - 1);
    for (Eigen::Index i = 0; i < n; ++i)
        w(i) *= std::pow(tend - traj.times(i), order - 1) / fact;
    return w;
}

namespace {

// Fornberg finite-difference weights for the m-th derivative at x0 on the
// given nodes (B. Fornberg, 1988).
Eigen::VectorXd fd_weights(double x0, const Eigen::VectorXd& nodes, int m) {
    const Eigen::Index n = nodes.size();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, m + 1);
    double c1 = 1.0;
    double c4 = nodes(0) - x0;
    c(0, 0) = 1.0;
    for (Eigen::Index i = 1; i < n; ++i) {
        const int mn = static_cast<int>(std::min<Eigen::Index>(i, m));
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes(i) - x0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double c3 = nodes(i) - nodes(j);
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
                c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
            }
            for (int k = mn; k >= 1; --k)
                c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
            c(j, 0) = c4 * c(j, 0) / c3;
        }
        c1 = c2;
    }
    return c.col(m);
}

}  // namespace

Eigen::MatrixXd estimate_initial_derivatives(const Trajectory& traj, int order) {
    if (order < 1) throw ConfigError("order must be >= 1");
    const Eigen::Index n = traj.state_dim();
    if (order == 1) return Eigen::MatrixXd(0, n);
    const Eigen::Index need = 2 * order + 1;
    if (traj.samples() < need)
        throw ConfigError("initial-derivative stencil needs " + std::to_string(need) +
                          " samples, trajectory has " + std::to_string(traj.samples()));
    Eigen::MatrixXd out(order - 1, n);
    for (int l = 1; l < order; ++l) {
        // minimal order-2 forward stencil: l+2 leading points
        const Eigen::Index pts = l + 2;
        const Eigen::VectorXd w = fd_weights(traj.times(0), traj.times.head(pts), l);
        out.row(l - 1) = w.transpose() * traj.states.topRows(pts);
    }
    return out;
}

Eigen::MatrixXd smoothed_initial_derivatives(const Trajectory& traj, int order,
                                             Eigen::Index window) {
    if (order < 1) throw ConfigError("order must be >= 1");
    const Eigen::Index n = traj.state_dim();
    if (order == 1) return Eigen::MatrixXd(0, n);
    if (window <= 0 || window > traj.samples()) window = traj.samples();
    const int deg = order;  // captures the local Taylor terms that matter
    if (window < deg + 1)
        throw ConfigError("smoothing window too small for polynomial degree");
    Eigen::MatrixXd V(window, deg + 1);
    const double t0 = traj.times(0);
    for (Eigen::Index i = 0; i < window; ++i) {
        double p = 1.0;
        for (int k = 0; k <= deg; ++k) {
            V(i, k) = p;
            p *= traj.times(i) - t0;
        }
    }
    const Eigen::MatrixXd coef =
        V.colPivHouseholderQr().solve(traj.states.topRows(window));
    Eigen::MatrixXd out(order - 1, n);
    double fact = 1.0;
    for (int l = 1; l < order; ++l) {
        fact *= l;
        out.row(l - 1) = fact * coef.row(l);
    }
    return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".meta.json");
    return p;
}

std::optional<TrajectoryMeta> load_sidecar(const std::filesystem::path& csv_path) {
    const auto sp = sidecar_path(csv_path);
    if (!std::filesystem::exists(sp)) return std::nullopt;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(sp));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(sp.string() + ": " + e.what());
    }
    TrajectoryMeta meta;
    meta.order = j.at("s").get<int>();
    if (j.contains("init_derivs")) {
        const auto& rows = j.at("init_derivs");
        if (!rows.empty()) {
            meta.init_derivs.resize(rows.size(), rows[0].size());
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (std::size_t c = 0; c < rows[r].size(); ++c)
                    meta.init_derivs(r, c) = rows[r][c].get<double>();
        }
    }
    return meta;
}

Trajectory load_trajectory(const std::filesystem::path& path, Eigen::Index n,
                           Eigen::Index m) {
    const auto rows = read_csv(path);
    if (rows.empty()) throw IoError(path.string() + ": empty trajectory file");
    const Eigen::Index cols = static_cast<Eigen::Index>(rows.front().size());
    if (cols != 1 + n + m)
        throw IoError(path.string() + ": expected " + std::to_string(1 + n + m) +
                      " columns (t, " + std::to_string(n) + " states, " +
                      std::to_string(m) + " controls), got " + std::to_string(cols));
    const Eigen::Index N = static_cast<Eigen::Index>(rows.size());
    Trajectory traj;
    traj.times.resize(N);
    traj.states.resize(N, n);
    traj.controls.resize(N, m);
    for (Eigen::Index i = 0; i < N; ++i) {
        traj.times(i) = rows[i][0];
        for (Eigen::Index c = 0; c < n; ++c) traj.states(i, c) = rows[i][1 + c];
        for (Eigen::Index c = 0; c < m; ++c) traj.controls(i, c) = rows[i][1 + n + c];
    }
    traj.initial_derivatives.resize(0, n);
    traj.validate();
    if (const auto meta = load_sidecar(path)) {
        if (meta->init_derivs.rows() > 0) {
            if (meta->init_derivs.cols() != n)
                throw IoError(path.string() + ": sidecar init_derivs dimension mismatch");
            traj.initial_derivatives = meta->init_derivs;
        }
    }
    return traj;
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path,
                     const std::optional<TrajectoryMeta>& meta) {
    std::ostringstream out;
    const Eigen::Index N = traj.samples();
    for (Eigen::Index i = 0; i < N; ++i) {
        out << format_double(traj.times(i));
        for (Eigen::Index c = 0; c < traj.state_dim(); ++c)
            out << ',' << format_double(traj.states(i, c));
        for (Eigen::Index c = 0; c < traj.control_dim(); ++c)
            out << ',' << format_double(traj.controls(i, c));
        out << '\n';
    }
    write_text_atomic(path, out.str());
    if (meta) {
        nlohmann::json j;
        j["s"] = meta->order;
        if (meta->init_derivs.rows() > 0) {
            nlohmann::json rows = nlohmann::json::array();
            for (Eigen::Index r = 0; r < meta->init_derivs.rows(); ++r) {
                nlohmann::json row = nlohmann::json::array();
                for (Eigen::Index c = 0; c < meta->init_derivs.cols(); ++c)
                    row.push_back(meta->init_derivs(r, c));
                rows.push_back(row);
            }
            j["init_derivs"] = rows;
        }
        write_text_atomic(sidecar_path(path), j.dump(2) + "\n");
    }
}

}  // namespace okid
