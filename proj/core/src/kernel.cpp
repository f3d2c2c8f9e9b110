#include "okid/kernel.hpp"

#include <algorithm>

#include "okid/errors.hpp"

namespace okid {

KernelFamily parse_kernel_family(const std::string& name) {
    if (name == "gaussian") return KernelFamily::Gaussian;
    if (name == "exponential-dot-product") return KernelFamily::ExponentialDotProduct;
    throw ConfigError("unknown kernel family: '" + name + "'");
}

std::string kernel_family_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::Gaussian: return "gaussian";
        case KernelFamily::ExponentialDotProduct: return "exponential-dot-product";
    }
    throw ConfigError("invalid kernel family enum value");
}

void KernelConfig::validate() const {
    if (!(shape > 0.0)) throw ConfigError("kernel shape must be positive");
}

double kernel_eval(const KernelConfig& cfg, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y) {
    cfg.validate();
    if (x.size() != y.size())
        throw ConfigError("kernel_eval: dimension mismatch (" +
                          std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
    switch (cfg.family) {
        case KernelFamily::Gaussian:
            return std::exp(-(x - y).squaredNorm() / cfg.shape);
        case KernelFamily::ExponentialDotProduct:
            return std::exp(x.dot(y) / cfg.shape);
    }
    throw ConfigError("invalid kernel family enum value");
}

Eigen::MatrixXd kernel_cross_matrix(const KernelConfig& cfg,
                                    const Eigen::MatrixXd& X,
                                    const Eigen::MatrixXd& Y) {
    cfg.validate();
    if (X.rows() == 0 || Y.rows() == 0)
        throw ConfigError("kernel_cross_matrix: empty input");
    if (X.cols() != Y.cols())
        throw ConfigError("kernel_cross_matrix: state dimension mismatch");

    const Eigen::Index p = X.rows();
    const Eigen::Index q = Y.rows();
    Eigen::MatrixXd K(p, q);

    if (cfg.family == KernelFamily::Gaussian) {
        // Direct per-row squared distances: exactly matches kernel_eval
        // entrywise (no ||x||^2+||y||^2-2x.y cancellation) and never forms
        // more than one row of differences at a time.
        for (Eigen::Index i = 0; i < p; ++i) {
            const Eigen::VectorXd d2 =
                (Y.rowwise() - X.row(i)).rowwise().squaredNorm();
            K.row(i) = (-d2.array() / cfg.shape).exp().transpose();
        }
    } else {
        // Contiguous dot products reproduce kernel_eval entrywise; a GEMM
        // formulation reduces in a different order and can drift an ulp.
        const Eigen::MatrixXd Yt = Y.transpose();
        Eigen::VectorXd xi;
        for (Eigen::Index i = 0; i < p; ++i) {
            xi = X.row(i).transpose();
            for (Eigen::Index j = 0; j < q; ++j)
                K(i, j) = std::exp(xi.dot(Yt.col(j)) / cfg.shape);
        }
    }
    return K;
}

}  // namespace okid
