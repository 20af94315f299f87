#include "coopkal/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace coopkal {

double RationalKernel::numerator(double l) const {
  double acc = 0.0;
  for (Eigen::Index q = num.size() - 1; q >= 0; --q) acc = acc * l + num(q);
  return acc;
}

double RationalKernel::denominator(double l) const {
  double acc = 0.0;
  for (Eigen::Index r = den.size() - 1; r >= 0; --r) acc = (acc + den(r)) * l;
  return 1.0 + acc;
}

double RationalKernel::max_abs(double hi, const Eigen::VectorXd& grid) const {
  double m = std::abs((*this)(0.0));
  constexpr int kSweep = 512;
  for (int i = 1; i <= kSweep; ++i) m = std::max(m, std::abs((*this)(hi * i / kSweep)));
  for (Eigen::Index i = 0; i < grid.size(); ++i) m = std::max(m, std::abs((*this)(grid(i))));
  return m;
}

double RationalKernel::min_denominator(double hi, const Eigen::VectorXd& grid) const {
  double m = denominator(0.0);
  constexpr int kSweep = 512;
  for (int i = 1; i <= kSweep; ++i) m = std::min(m, denominator(hi * i / kSweep));
  for (Eigen::Index i = 0; i < grid.size(); ++i) m = std::min(m, denominator(grid(i)));
  return m;
}

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kDenMargin = 1e-6;
// a fit that overshoots the data this much has a pole near the range
constexpr double kOvershoot = 2.0;

bool admissible(const RationalKernel& k, double hi, const Eigen::VectorXd& grid, double pmax) {
  return k.min_denominator(hi, grid) > kDenMargin && k.max_abs(hi, grid) <= kOvershoot * pmax;
}

// Columns live in scaled x = lambda / s; the caller maps coefficients back.
Eigen::MatrixXd powers(const Eigen::VectorXd& x, int lo, int hi) {
  Eigen::MatrixXd V(x.size(), std::max(0, hi - lo + 1));
  for (int q = lo; q <= hi; ++q) V.col(q - lo) = x.array().pow(q).matrix();
  return V;
}

RationalKernel unscale(const Eigen::VectorXd& b, const Eigen::VectorXd& a, double s) {
  RationalKernel k;
  k.num = b;
  k.den = a;
  for (Eigen::Index q = 0; q < b.size(); ++q) k.num(q) /= std::pow(s, static_cast<double>(q));
  for (Eigen::Index r = 0; r < a.size(); ++r) k.den(r) /= std::pow(s, static_cast<double>(r + 1));
  return k;
}

double sse(const RationalKernel& k, const Eigen::VectorXd& lam, const Eigen::VectorXd& p) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double r = k(lam(i)) - p(i);
    acc += r * r;
  }
  return acc;
}

}  // namespace

RationalKernel fit_kernel(const Eigen::VectorXd& eigenvalues, const Eigen::VectorXd& psd, KernelOrders orders,
                          double check_max) {
  const Eigen::Index N = eigenvalues.size();
  const int qn = orders.qn;
  const int qd = orders.qd;
  if (qn < 0 || qd < 0) throw ContractError("fit_kernel: orders must be nonnegative");
  if (psd.size() != N) throw ContractError("fit_kernel: grid and psd sizes differ");
  if (N <= qn + qd + 1) throw ContractError("fit_kernel: need N > Qn + Qd + 1");
  if (!psd.allFinite() || !eigenvalues.allFinite()) throw NumericalError("fit_kernel: non-finite input");
  if (psd.minCoeff() < 0.0) throw ContractError("fit_kernel: psd must be nonnegative");

  const double lmax = eigenvalues.maxCoeff();
  if (check_max < 0.0) check_max = 1.1 * lmax;

  if (psd.maxCoeff() == 0.0) {
    return {Eigen::VectorXd::Zero(qn + 1), Eigen::VectorXd::Zero(qd)};
  }

  const double s = lmax > 0.0 ? lmax : 1.0;
  const Eigen::VectorXd x = eigenvalues / s;
  const Eigen::MatrixXd Vn = powers(x, 0, qn);
  const Eigen::MatrixXd Vd = powers(x, 1, qd);

  Eigen::MatrixXd A(N, qn + 1 + qd);
  A << Vn, -(psd.asDiagonal() * Vd);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(kRankTol);
  if (qr.rank() < A.cols()) {
    throw FitError("fit_kernel: rank-deficient design for orders (" + std::to_string(qn) + "," +
                   std::to_string(qd) + ")");
  }
  Eigen::VectorXd c = qr.solve(psd);

  RationalKernel best = unscale(c.head(qn + 1), c.tail(qd), s);
  const double pmax = psd.maxCoeff();
  if (!admissible(best, check_max, eigenvalues, pmax)) {
    throw FitError("fit_kernel: denominator not positive or pole in range for orders (" + std::to_string(qn) + "," +
                   std::to_string(qd) + ")");
  }

  if (qd > 0) {
    const Eigen::VectorXd numv = Vn * c.head(qn + 1);
    const Eigen::VectorXd denv = (Vd * c.tail(qd)).array() + 1.0;
    const Eigen::VectorXd r = numv.cwiseQuotient(denv) - psd;
    Eigen::MatrixXd J(N, qn + 1 + qd);
    J << denv.cwiseInverse().asDiagonal() * Vn,
        -(numv.cwiseQuotient(denv.cwiseAbs2()).asDiagonal() * Vd);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> jqr(J);
    jqr.setThreshold(kRankTol);
    const Eigen::VectorXd step = jqr.solve(-r);
    if (step.allFinite()) {
      const Eigen::VectorXd c2 = c + step;
      RationalKernel cand = unscale(c2.head(qn + 1), c2.tail(qd), s);
      if (admissible(cand, check_max, eigenvalues, pmax) &&
          sse(cand, eigenvalues, psd) < sse(best, eigenvalues, psd)) {
        best = cand;
      }
    }
  }
  return best;
}

RationalKernel fit_kernel_auto(const Eigen::VectorXd& eigenvalues, const Eigen::VectorXd& psd, KernelOrders orders,
                               double check_max, KernelOrders* used) {
  std::vector<KernelOrders> ladder;
  for (int qd = orders.qd; qd >= 0; --qd) ladder.push_back({orders.qn, qd});
  for (int qn = orders.qn - 1; qn >= 0; --qn) ladder.push_back({qn, 0});
  for (const KernelOrders& o : ladder) {
    if (eigenvalues.size() <= o.qn + o.qd + 1) continue;
    try {
      RationalKernel k = fit_kernel(eigenvalues, psd, o, check_max);
      if (used) *used = o;
      return k;
    } catch (const FitError&) {
    }
  }
  throw FitError("fit_kernel_auto: no order in the ladder produced a valid fit");
}

RationalKernel adapt_kernel(const RationalKernel& src, const std::optional<SpectralObs>& target_obs, double tau) {
  if (!target_obs) return src;
  if (tau < 0.0) throw ContractError("adapt_kernel: ridge weight must be nonnegative");
  const Eigen::VectorXd& lam = target_obs->eigenvalues;
  const Eigen::VectorXd& p = target_obs->psd;
  if (lam.size() != p.size()) throw ContractError("adapt_kernel: grid and psd sizes differ");
  const int qn = static_cast<int>(src.num.size()) - 1;
  const int qd = static_cast<int>(src.den.size());
  const Eigen::Index N = lam.size();
  const int m = qn + 1 + qd;

  // stacked ridge system [A; sqrt(tau) I] c = [p; sqrt(tau) c_src]
  Eigen::MatrixXd A(N + m, m);
  Eigen::VectorXd rhs(N + m);
  A.topRows(N) << powers(lam, 0, qn), -(p.asDiagonal() * powers(lam, 1, qd));
  A.bottomRows(m) = std::sqrt(tau) * Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd c_src(m);
  c_src << src.num, src.den;
  rhs << p, std::sqrt(tau) * c_src;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(kRankTol);
  if (qr.rank() < m) throw FitError("adapt_kernel: rank-deficient ridge system");
  const Eigen::VectorXd c = qr.solve(rhs);
  RationalKernel out{c.head(qn + 1), c.tail(qd)};
  const double hi = N ? 1.1 * lam.maxCoeff() : 0.0;
  if (!(out.min_denominator(hi, lam) > kDenMargin)) throw FitError("adapt_kernel: denominator not positive");
  return out;
}

Eigen::VectorXd discretize(const RationalKernel& kernel, const Eigen::VectorXd& eigenvalues) {
  Eigen::VectorXd out(eigenvalues.size());
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double d = kernel.denominator(eigenvalues(i));
    if (!(d > 0.0)) throw NumericalError("discretize: invalid kernel, denominator <= 0 on the grid");
    out(i) = std::max(kernel.numerator(eigenvalues(i)) / d, 0.0);
  }
  return out;
}

Eigen::VectorXd transfer_psd(const Eigensystem& src_es, const Eigen::VectorXd& src_psd, const Eigensystem& trg_es,
                             KernelOrders orders, const std::optional<SpectralObs>& target_obs, double tau) {
  const double hi = 1.1 * std::max(src_es.lambda_max(), trg_es.lambda_max());
  const RationalKernel k = fit_kernel_auto(src_es.eigenvalues, src_psd, orders, hi);
  return discretize(adapt_kernel(k, target_obs, tau), trg_es.eigenvalues);
}

}  // namespace coopkal
