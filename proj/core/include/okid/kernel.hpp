#ifndef OKID_KERNEL_HPP
#define OKID_KERNEL_HPP

#include <Eigen/Dense>
#include <string>

namespace okid {

enum class KernelFamily {
    Gaussian,                // k(x,y) = exp(-||x-y||^2 / mu)
    ExponentialDotProduct,   // k(x,y) = exp(x.y / mu)
};

KernelFamily parse_kernel_family(const std::string& name);
std::string kernel_family_name(KernelFamily family);

struct KernelConfig {
    KernelFamily family = KernelFamily::Gaussian;
    double shape = 1.0;  // mu, must be > 0

    void validate() const;
};

double kernel_eval(const KernelConfig& cfg, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y);

// Rows of X and Y are states.  Entry (i,j) = k(X.row(i), Y.row(j)).
// Evaluated in row blocks so no intermediate larger than one block is formed.
Eigen::MatrixXd kernel_cross_matrix(const KernelConfig& cfg,
                                    const Eigen::MatrixXd& X,
                                    const Eigen::MatrixXd& Y);

}  // namespace okid

#endif
