#pragma once

#include "coopkal/graph.hpp"
#include "coopkal/kalman.hpp"

#include <Eigen/Dense>

namespace coopkal {

// (C^T C + zeta L)^-1 C^T y
Eigen::VectorXd tikhonov_estimate(const Eigen::MatrixXd& L, const ObservationModel& obs, const Eigen::VectorXd& y,
                                  double zeta);

// H y + (I - H C) mu with H = S C^T (C S C^T)^-1, S = U diag(psd) U^T.
// The psd is floored at floor * max(psd) before building S.
Eigen::VectorXd wiener_estimate(const Eigensystem& es, const Eigen::VectorXd& psd, const Eigen::VectorXd& mean,
                                const ObservationModel& obs, const Eigen::VectorXd& y, double floor = 1e-8);

}  // namespace coopkal
