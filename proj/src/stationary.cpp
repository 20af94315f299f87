#include "coopkal/stationary.hpp"

#include "coopkal/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace coopkal {

Eigen::MatrixXd spectral_covariance(const Eigensystem& es, const Eigen::VectorXd& psd) {
  if (psd.size() != es.size()) throw ContractError("spectral_covariance: dimension mismatch");
  const Eigen::MatrixXd& U = es.eigenvectors;
  return U * psd.asDiagonal() * U.transpose();
}

Eigen::VectorXd bank_kernel(int kind, const Eigen::VectorXd& lambda, double lambda_max) {
  Eigen::VectorXd out(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double l = lambda(i);
    switch (kind) {
      case 0: out(i) = 1.0 - l / lambda_max; break;
      case 1: out(i) = std::exp(-l / lambda_max); break;
      case 2: out(i) = 1.0 / (1.0 + l); break;
      case 3: out(i) = std::cos(std::numbers::pi * l / (2.0 * lambda_max)); break;
      default: throw ContractError("bank_kernel: kind must be in [0, 4)");
    }
  }
  return out;
}

CyclicPsd synth_psd_bank(const Eigensystem& es, int period) {
  if (period < 4 || period % 4 != 0) throw ContractError("synth_psd_bank: period must be a multiple of 4");
  const double lmax = es.lambda_max();
  if (!(lmax > 0.0)) throw NumericalError("synth_psd_bank: degenerate spectrum, lambda_max == 0");
  CyclicPsd cp;
  cp.period = period;
  for (int p = 0; p < period; ++p) {
    // roundoff can push the kernels a hair below zero at lambda_max
    cp.psds.push_back(bank_kernel(p % 4, es.eigenvalues, lmax).cwiseMax(0.0));
    cp.means.push_back(Eigen::VectorXd::Ones(es.size()));
  }
  return cp;
}

Eigen::VectorXd sample_cgwss(const Eigensystem& es, const CyclicPsd& cp, long t, std::mt19937_64& rng) {
  const Eigen::VectorXd& p = cp.psd_at(t);
  if (p.size() != es.size()) throw ContractError("sample_cgwss: psd dimension mismatch");
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd z(es.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = nd(rng);
  return cp.mean_at(t) + es.eigenvectors * (p.cwiseSqrt().cwiseProduct(z));
}

PsdEstimate estimate_psd(const Eigen::MatrixXd& samples, const Eigensystem& es) {
  const Eigen::Index K = samples.cols();
  if (K < 2) throw DataError("estimate_psd: insufficient samples, need K >= 2");
  if (samples.rows() != es.size()) throw ContractError("estimate_psd: dimension mismatch");
  PsdEstimate est;
  est.mean = samples.rowwise().mean();
  // diag(U^T S U) without forming S
  const Eigen::MatrixXd Z = es.eigenvectors.transpose() * (samples.colwise() - est.mean);
  est.psd = (Z.array().square().rowwise().sum() / static_cast<double>(K)).matrix().cwiseMax(0.0);
  return est;
}

PeriodEstimate estimate_period(const Eigen::MatrixXd& stream, int max_period) {
  const Eigen::Index T = stream.cols();
  if (max_period < 2) throw ContractError("estimate_period: max_period must be >= 2");
  if (T < 2 * max_period) throw DataError("estimate_period: insufficient samples, need T >= 2 max_period");

  const Eigen::VectorXd xbar = stream.rowwise().mean();
  Eigen::VectorXd e = (stream.colwise() - xbar).colwise().squaredNorm().transpose();
  e.array() -= e.mean();
  const double var = e.squaredNorm();

  PeriodEstimate out;
  const double scale = std::max(1.0, (stream.colwise() - xbar).squaredNorm());
  if (var <= 1e-24 * scale * scale) {
    out.period = 2;
    out.flat = true;
    out.scores.assign(static_cast<std::size_t>(max_period - 1), 0.0);
    return out;
  }

  // biased estimate, so a multiple of the true period scores below it
  double best = -2.0;
  for (int P = 2; P <= max_period; ++P) {
    const double r = e.head(T - P).dot(e.tail(T - P)) / var;
    out.scores.push_back(r);
    if (r > best) {
      best = r;
      out.period = P;
    }
  }
  return out;
}

}  // namespace coopkal
