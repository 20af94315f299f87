#include "coopkal/baselines.hpp"

#include "coopkal/error.hpp"
#include "coopkal/stationary.hpp"

namespace coopkal {

Eigen::VectorXd tikhonov_estimate(const Eigen::MatrixXd& L, const ObservationModel& obs, const Eigen::VectorXd& y,
                                  double zeta) {
  const Eigen::Index n = L.rows();
  obs.validate(static_cast<int>(n));
  if (!(zeta >= 0.0)) throw ContractError("tikhonov_estimate: zeta must be >= 0");
  if (y.size() != static_cast<Eigen::Index>(obs.observed_nodes.size())) {
    throw ContractError("tikhonov_estimate: observation size mismatch");
  }
  Eigen::MatrixXd A = zeta * L;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < obs.observed_nodes.size(); ++i) {
    const int m = obs.observed_nodes[i];
    A(m, m) += 1.0;
    rhs(m) += y(static_cast<Eigen::Index>(i));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14)) {
    throw NumericalError("tikhonov_estimate: singular system");
  }
  return llt.solve(rhs);
}

Eigen::VectorXd wiener_estimate(const Eigensystem& es, const Eigen::VectorXd& psd, const Eigen::VectorXd& mean,
                                const ObservationModel& obs, const Eigen::VectorXd& y, double floor) {
  const int n = es.size();
  obs.validate(n);
  if (psd.size() != n || mean.size() != n) throw ContractError("wiener_estimate: dimension mismatch");
  if (y.size() != static_cast<Eigen::Index>(obs.observed_nodes.size())) {
    throw ContractError("wiener_estimate: observation size mismatch");
  }
  const Eigen::VectorXd p = psd.cwiseMax(floor * psd.maxCoeff());
  const Eigen::MatrixXd S = spectral_covariance(es, p);
  const std::vector<int>& M = obs.observed_nodes;
  const Eigen::MatrixXd CSC = S(M, M);
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (CSC + CSC.transpose()));
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-15)) {
    throw NumericalError("wiener_estimate: singular innovation matrix");
  }
  // mu + S C^T (C S C^T)^-1 (y - C mu), same as H y + (I - H C) mu
  const Eigen::VectorXd w = llt.solve(y - obs.select(mean));
  return mean + S(Eigen::all, M) * w;
}

}  // namespace coopkal
