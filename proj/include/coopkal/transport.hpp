#pragma once

#include "coopkal/graph.hpp"
#include "coopkal/stationary.hpp"

#include <Eigen/Dense>

namespace coopkal {

struct TransportMap {
  Eigen::VectorXd mu_from;
  Eigen::VectorXd mu_to;
  Eigen::MatrixXd Q;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  static TransportMap identity(int n);
};

enum class TransportMode { Sqrt, Linear };

inline constexpr double kDefaultPsdFloor = 1e-8;

// Square root of a symmetric PSD matrix; negative eigenvalues clamped to 0.
Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& S);

double wasserstein2(const GaussianMoments& g1, const GaussianMoments& g2);

TransportMap ot_map_general(const GaussianMoments& g1, const GaussianMoments& g2,
                            double floor = kDefaultPsdFloor);

TransportMap ot_map_spectral(const Eigensystem& es, const Eigen::VectorXd& p1, const Eigen::VectorXd& p2,
                             const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2,
                             TransportMode mode = TransportMode::Sqrt, double floor = kDefaultPsdFloor);

}  // namespace coopkal
