#include "coopkal/transport.hpp"

#include "coopkal/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace coopkal {

Eigen::VectorXd TransportMap::apply(const Eigen::VectorXd& x) const {
  if (x.size() != mu_from.size()) throw ContractError("TransportMap::apply: dimension mismatch");
  return mu_to + Q * (x - mu_from);
}

TransportMap TransportMap::identity(int n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n)};
}

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym_eig(const Eigen::MatrixXd& S, const char* who) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (S + S.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError(std::string(who) + ": eigensolver failed");
  return eig;
}

void check_psd(const Eigen::MatrixXd& S, const char* who) {
  if (S.rows() != S.cols()) throw ContractError(std::string(who) + ": covariance not square");
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ContractError(std::string(who) + ": covariance not symmetric");
  }
  const double lmin = sym_eig(S, who).eigenvalues().minCoeff();
  if (lmin < -1e-10 * std::max(1.0, std::abs(S.trace()))) {
    throw ContractError(std::string(who) + ": covariance not positive semidefinite");
  }
}

}  // namespace

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& S) {
  const auto eig = sym_eig(S, "sqrtm_psd");
  const Eigen::VectorXd d = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
}

double wasserstein2(const GaussianMoments& g1, const GaussianMoments& g2) {
  if (g1.mean.size() != g2.mean.size() || g1.cov.rows() != g2.cov.rows() || g1.cov.rows() != g1.mean.size()) {
    throw ContractError("wasserstein2: dimension mismatch");
  }
  check_psd(g1.cov, "wasserstein2");
  check_psd(g2.cov, "wasserstein2");
  const Eigen::MatrixXd r1 = sqrtm_psd(g1.cov);
  const Eigen::MatrixXd cross = sqrtm_psd(r1 * g2.cov * r1);
  const double d = (g1.mean - g2.mean).squaredNorm() + g1.cov.trace() + g2.cov.trace() - 2.0 * cross.trace();
  return std::max(d, 0.0);
}

TransportMap ot_map_general(const GaussianMoments& g1, const GaussianMoments& g2, double floor) {
  const Eigen::Index n = g1.mean.size();
  if (g2.mean.size() != n || g1.cov.rows() != n || g2.cov.rows() != n) {
    throw ContractError("ot_map_general: dimension mismatch");
  }
  const auto eig = sym_eig(g1.cov, "ot_map_general");
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmax > 0.0)) throw NumericalError("ot_map_general: singular source covariance");
  const Eigen::VectorXd d = eig.eigenvalues().cwiseMax(floor * lmax);
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const Eigen::MatrixXd r1 = V * d.cwiseSqrt().asDiagonal() * V.transpose();
  const Eigen::MatrixXd r1inv = V * d.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
  const Eigen::MatrixXd mid = sqrtm_psd(r1 * g2.cov * r1);
  Eigen::MatrixXd Q = r1inv * mid * r1inv;
  Q = (0.5 * (Q + Q.transpose())).eval();
  if (!Q.allFinite()) throw NumericalError("ot_map_general: non-finite map");
  return {g1.mean, g2.mean, Q};
}

TransportMap ot_map_spectral(const Eigensystem& es, const Eigen::VectorXd& p1, const Eigen::VectorXd& p2,
                             const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2, TransportMode mode,
                             double floor) {
  const Eigen::Index n = es.size();
  if (p1.size() != n || p2.size() != n || mu1.size() != n || mu2.size() != n) {
    throw ContractError("ot_map_spectral: dimension mismatch");
  }
  const double pmax = p1.maxCoeff();
  if (!(pmax > 0.0)) throw NumericalError("ot_map_spectral: singular source, p1 is all zero");
  Eigen::VectorXd r = p2.cwiseMax(0.0).cwiseQuotient(p1.cwiseMax(floor * pmax));
  if (mode == TransportMode::Sqrt) r = r.cwiseSqrt();
  const Eigen::MatrixXd& U = es.eigenvectors;
  Eigen::MatrixXd Q = U * r.asDiagonal() * U.transpose();
  Q = (0.5 * (Q + Q.transpose())).eval();
  return {mu1, mu2, Q};
}

}  // namespace coopkal
