#pragma once

#include "coopkal/graph.hpp"

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace coopkal {

struct CyclicPsd {
  int period = 1;
  std::vector<Eigen::VectorXd> psds;   // psds[p] pairs with phase t mod period
  std::vector<Eigen::VectorXd> means;
  const Eigen::VectorXd& psd_at(long t) const { return psds[static_cast<std::size_t>(phase_of(t))]; }
  const Eigen::VectorXd& mean_at(long t) const { return means[static_cast<std::size_t>(phase_of(t))]; }
  int phase_of(long t) const { return static_cast<int>(((t % period) + period) % period); }
};

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Covariance U diag(p) U^T.
Eigen::MatrixXd spectral_covariance(const Eigensystem& es, const Eigen::VectorXd& psd);

// Four low-pass kernels cycling with phase mod 4; unit means.
CyclicPsd synth_psd_bank(const Eigensystem& es, int period = 8);

// Single kernel of the bank evaluated on a grid; kind in [0, 4).
Eigen::VectorXd bank_kernel(int kind, const Eigen::VectorXd& lambda, double lambda_max);

Eigen::VectorXd sample_cgwss(const Eigensystem& es, const CyclicPsd& cp, long t, std::mt19937_64& rng);

struct PsdEstimate {
  Eigen::VectorXd psd;
  Eigen::VectorXd mean;
};

// samples: N x K at one phase, covariance divisor K.
PsdEstimate estimate_psd(const Eigen::MatrixXd& samples, const Eigensystem& es);

struct PeriodEstimate {
  int period = 2;
  bool flat = false;
  std::vector<double> scores;  // scores[i] for candidate i + 2
};

PeriodEstimate estimate_period(const Eigen::MatrixXd& stream, int max_period);

}  // namespace coopkal
