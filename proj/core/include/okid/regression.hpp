#ifndef OKID_REGRESSION_HPP
#define OKID_REGRESSION_HPP

#include <filesystem>
#include <vector>

#include "okid/occupation.hpp"

namespace okid {

struct Prediction {
    Eigen::VectorXd drift;          // fhat(x), n
    Eigen::MatrixXd effectiveness;  // ghat(x), n x m
};

// Ridge fit over the occupation basis: (G + lambda I) W = B with B the
// stacked FTC targets.  weights is M x n, row j the coefficient of basis
// element j across output rows.
struct IdentifiedModel {
    OccupationBasis basis;
    Eigen::MatrixXd weights;
    double lambda = 0.0;
};

struct FitReport {
    double condition_estimate = 0.0;  // of G + lambda I
    double residual_relative = 0.0;   // ||(G+lambda I)W - B||_F / ||B||_F
    double wall_seconds = 0.0;
    Eigen::Index basis_size = 0;
};

IdentifiedModel fit(const OccupationBasis& basis, double lambda, int threads = 0,
                    FitReport* report = nullptr);

// Solve (G + lambda I) W = B for an already-assembled Gram matrix; the fit's
// linear-algebra core, exposed for testing against dense-solver oracles.
Eigen::MatrixXd solve_ridge_system(const Eigen::MatrixXd& gram, double lambda,
                                   const Eigen::MatrixXd& targets,
                                   FitReport* report = nullptr);

Prediction predict(const IdentifiedModel& model, const Eigen::VectorXd& x);

// Elementwise identical to predict; shares trajectory-sample kernel
// evaluations across query points (rows of X).
std::vector<Prediction> predict_batch(const IdentifiedModel& model,
                                      const Eigen::MatrixXd& X);

void save_model(const IdentifiedModel& model, const std::filesystem::path& path);
IdentifiedModel load_model(const std::filesystem::path& path);

}  // namespace okid

#endif
