#pragma once

#include "coopkal/error.hpp"
#include "coopkal/graph.hpp"

#include <Eigen/Dense>
#include <optional>

namespace coopkal {

// p(lambda) = (b0 + b1 l + ... ) / (1 + a1 l + ...)
struct RationalKernel {
  Eigen::VectorXd num;  // b_0 .. b_Qn
  Eigen::VectorXd den;  // a_1 .. a_Qd

  double numerator(double l) const;
  double denominator(double l) const;
  double operator()(double l) const { return numerator(l) / denominator(l); }
  // smallest denominator value on a uniform sweep of [0, hi] plus the given grid
  double min_denominator(double hi, const Eigen::VectorXd& grid = {}) const;
  double max_abs(double hi, const Eigen::VectorXd& grid = {}) const;
};

struct KernelOrders {
  int qn = 3;
  int qd = 3;
};

class FitError : public NumericalError {
public:
  explicit FitError(const std::string& msg) : NumericalError(msg) {}
};

struct SpectralObs {
  Eigen::VectorXd eigenvalues;
  Eigen::VectorXd psd;
};

// Linearized least squares followed by one Gauss-Newton pass. The
// denominator must stay positive on [0, check_max] (default 1.1 max grid)
// and the kernel may not exceed twice the largest psd value there.
RationalKernel fit_kernel(const Eigen::VectorXd& eigenvalues, const Eigen::VectorXd& psd, KernelOrders orders,
                          double check_max = -1.0);

// fit_kernel with orders lowered until the fit succeeds: (qn, qd), (qn, qd-1),
// ..., (qn, 0), then (qn-1, 0) down to (0, 0).
RationalKernel fit_kernel_auto(const Eigen::VectorXd& eigenvalues, const Eigen::VectorXd& psd, KernelOrders orders,
                               double check_max = -1.0, KernelOrders* used = nullptr);

// Ridge refit toward src coefficients with weight tau; src if obs is absent.
RationalKernel adapt_kernel(const RationalKernel& src, const std::optional<SpectralObs>& target_obs, double tau);

Eigen::VectorXd discretize(const RationalKernel& kernel, const Eigen::VectorXd& eigenvalues);

Eigen::VectorXd transfer_psd(const Eigensystem& src_es, const Eigen::VectorXd& src_psd, const Eigensystem& trg_es,
                             KernelOrders orders = {}, const std::optional<SpectralObs>& target_obs = std::nullopt,
                             double tau = 1.0);

}  // namespace coopkal
