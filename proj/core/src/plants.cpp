#include "okid/plants.hpp"

#include <cmath>

#include "okid/errors.hpp"

namespace okid {

namespace {

double get(const std::map<std::string, double>& params, const std::string& key) {
    const auto it = params.find(key);
    if (it == params.end()) throw ConfigError("missing plant parameter '" + key + "'");
    return it->second;
}

}  // namespace

std::map<std::string, double> twolink_default_params() {
    return {{"p1", 3.473}, {"p2", 0.196}, {"p3", 0.242},
            {"fd1", 5.3},  {"fd2", 1.1},
            {"fs1", 8.45}, {"fs2", 2.35}};
}

Eigen::Matrix2d twolink_inertia(double q2, const std::map<std::string, double>& params) {
    const double p1 = get(params, "p1");
    const double p2 = get(params, "p2");
    const double p3 = get(params, "p3");
    const double c = std::cos(q2);
    Eigen::Matrix2d m;
    m << p1 + 2.0 * p3 * c, p2 + p3 * c,
         p2 + p3 * c,       p2;
    return m;
}

Eigen::Vector2d twolink_coriolis(const Eigen::Vector2d& q, const Eigen::Vector2d& qd,
                                 const std::map<std::string, double>& params) {
    const double p3 = get(params, "p3");
    const double s = std::sin(q(1));
    Eigen::Matrix2d v;
    v << -p3 * s * qd(1), -p3 * s * (qd(0) + qd(1)),
          p3 * s * qd(0), 0.0;
    Eigen::Matrix2d fd = Eigen::Matrix2d::Zero();
    fd(0, 0) = get(params, "fd1");
    fd(1, 1) = get(params, "fd2");
    Eigen::Vector2d fs(get(params, "fs1") * std::tanh(qd(0)),
                       get(params, "fs2") * std::tanh(qd(1)));
    return (v + fd) * qd + fs;
}

PlantSpec make_duffing_plant() {
    PlantSpec plant;
    plant.name = "duffing";
    plant.order = 2;
    plant.state_dim = 1;
    plant.control_dim = 1;
    plant.drift = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd out(1);
        out(0) = x(0) - x(0) * x(0) * x(0);
        return out;
    };
    plant.effectiveness = [](const Eigen::VectorXd& x) {
        Eigen::MatrixXd out(1, 1);
        out(0, 0) = 2.0 + std::sin(x(0));
        return out;
    };
    return plant;
}

PlantSpec make_twolink_plant() {
    PlantSpec plant;
    plant.name = "twolink";
    plant.order = 1;
    plant.state_dim = 4;
    plant.control_dim = 2;
    plant.params = twolink_default_params();
    const auto params = plant.params;
    plant.drift = [params](const Eigen::VectorXd& x) {
        const Eigen::Vector2d q = x.head<2>();
        const Eigen::Vector2d qd = x.tail<2>();
        const Eigen::Vector2d acc =
            -twolink_inertia(q(1), params).inverse() * twolink_coriolis(q, qd, params);
        Eigen::VectorXd out(4);
        out << qd, acc;
        return out;
    };
    plant.effectiveness = [params](const Eigen::VectorXd& x) {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(4, 2);
        out.bottomRows<2>() = twolink_inertia(x(1), params).inverse();
        return out;
    };
    return plant;
}

PlantSpec make_plant(const std::string& name,
                     const std::map<std::string, double>& param_overrides) {
    PlantSpec plant;
    if (name == "duffing") {
        plant = make_duffing_plant();
        if (!param_overrides.empty())
            throw ConfigError("duffing plant takes no parameters");
    } else if (name == "twolink") {
        auto params = twolink_default_params();
        for (const auto& [key, value] : param_overrides) {
            if (params.find(key) == params.end())
                throw ConfigError("unknown twolink parameter '" + key + "'");
            params[key] = value;
        }
        plant = make_twolink_plant();
        if (!param_overrides.empty()) {
            plant.params = params;
            // rebuild closures over the overridden parameters
            plant.drift = [params](const Eigen::VectorXd& x) {
                const Eigen::Vector2d q = x.head<2>();
                const Eigen::Vector2d qd = x.tail<2>();
                const Eigen::Vector2d acc =
                    -twolink_inertia(q(1), params).inverse() *
                    twolink_coriolis(q, qd, params);
                Eigen::VectorXd out(4);
                out << qd, acc;
                return out;
            };
            plant.effectiveness = [params](const Eigen::VectorXd& x) {
                Eigen::MatrixXd out = Eigen::MatrixXd::Zero(4, 2);
                out.bottomRows<2>() = twolink_inertia(x(1), params).inverse();
                return out;
            };
        }
    } else {
        throw ConfigError("unknown plant '" + name + "' (expected duffing or twolink)");
    }
    return plant;
}

}  // namespace okid
