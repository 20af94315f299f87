#include "coopkal/kalman.hpp"

#include "coopkal/error.hpp"

#include <algorithm>
#include <string>

namespace coopkal {

void ObservationModel::validate(int n) const {
  if (observed_nodes.empty()) throw ContractError("ObservationModel: no observed nodes");
  if (!(sigma_w >= 0.0)) throw ContractError("ObservationModel: sigma_w must be >= 0");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int m : observed_nodes) {
    if (m < 0 || m >= n) throw ContractError("ObservationModel: node index out of range");
    if (seen[static_cast<std::size_t>(m)]) throw ContractError("ObservationModel: duplicate node index");
    seen[static_cast<std::size_t>(m)] = 1;
  }
}

Eigen::MatrixXd ObservationModel::C(int n) const {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(observed_nodes.size()), n);
  for (std::size_t i = 0; i < observed_nodes.size(); ++i) c(static_cast<Eigen::Index>(i), observed_nodes[i]) = 1.0;
  return c;
}

Eigen::VectorXd ObservationModel::select(const Eigen::VectorXd& x) const {
  return x(observed_nodes);
}

StateDynamics StateDynamics::from_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double sigma_v) {
  const Eigen::Index n = A.rows();
  return {TransportMap{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), A}, B, sigma_v};
}

KalmanTrack init_track(int n, const Eigen::VectorXd& x0, double delta) {
  if (!(delta > 0.0)) throw ContractError("init_track: delta must be > 0");
  if (x0.size() != n) throw ContractError("init_track: dimension mismatch");
  return {x0, delta * Eigen::MatrixXd::Identity(n, n), 0};
}

Prior predict(const KalmanTrack& track, const StateDynamics& dyn, const Eigen::VectorXd& u) {
  const Eigen::Index n = track.estimate.size();
  const Eigen::MatrixXd& Q = dyn.transition.Q;
  if (Q.rows() != n || Q.cols() != n || dyn.B.rows() != n || dyn.B.cols() != u.size()) {
    throw ContractError("predict: dimension mismatch");
  }
  Prior p;
  p.estimate = dyn.transition.apply(track.estimate) + dyn.B * u;
  p.err_cov = Q * track.err_cov * Q.transpose();
  p.err_cov.diagonal().array() += dyn.sigma_v * dyn.sigma_v;
  p.t = track.t + 1;
  return p;
}

Eigen::MatrixXd gain(const Eigen::MatrixXd& P_prior, const ObservationModel& obs) {
  const Eigen::Index n = P_prior.rows();
  obs.validate(static_cast<int>(n));
  const std::vector<int>& M = obs.observed_nodes;
  Eigen::MatrixXd S = P_prior(M, M);
  S.diagonal().array() += obs.sigma_w * obs.sigma_w;
  S = (0.5 * (S + S.transpose())).eval();
  // K^T = S^-1 C P^T
  const Eigen::MatrixXd rhs = P_prior(Eigen::all, M).transpose();

  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-15)) {
    Eigen::MatrixXd Sj = S;
    Sj.diagonal().array() += 1e-12 * std::max(S.trace(), 1e-300);
    llt.compute(Sj);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-15)) {
      throw NumericalError("gain: singular innovation matrix");
    }
  }
  const Eigen::MatrixXd K = llt.solve(rhs).transpose();
  if (!K.allFinite()) throw NumericalError("gain: non-finite Kalman gain");
  return K;
}

KalmanTrack update(const Prior& prior, const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                   const ObservationModel& obs) {
  const Eigen::Index n = prior.estimate.size();
  const auto m = static_cast<Eigen::Index>(obs.observed_nodes.size());
  if (K.rows() != n || K.cols() != m || y.size() != m) throw ContractError("update: dimension mismatch");
  KalmanTrack out;
  out.estimate = prior.estimate + K * (y - obs.select(prior.estimate));
  // (I - K C) P, with C a row selection
  out.err_cov = prior.err_cov - K * prior.err_cov(obs.observed_nodes, Eigen::all);
  out.err_cov = (0.5 * (out.err_cov + out.err_cov.transpose())).eval();
  out.t = prior.t;
  return out;
}

Eigen::VectorXd pi_control(const KalmanTrack& track, const Eigen::VectorXd& slot_mean, double eta) {
  if (slot_mean.size() != track.estimate.size()) throw ContractError("pi_control: dimension mismatch");
  return eta * (track.estimate - slot_mean);
}

CoopResult coop_step(const SourceState& src, const TargetState& trg, const ObservationModel& obs,
                     const Eigen::VectorXd& y, const StepMoments& mom, const CoopConfig& cfg, long t) {
  if (!src.es || !trg.es) throw ContractError("coop_step: missing eigensystem");
  const int n = trg.es->size();

  CoopResult res;
  res.p2 = transfer_psd(*src.es, src.psd_prev, *trg.es, cfg.orders);
  res.map = ot_map_spectral(*trg.es, trg.psd_old, res.p2, mom.mu1, mom.mu2, cfg.mode, cfg.floor);

  StateDynamics dyn{res.map, Eigen::MatrixXd::Identity(n, n), cfg.sigma_v};
  const Eigen::VectorXd u = pi_control(trg.track, mom.control_ref, cfg.eta);
  res.prior = predict(trg.track, dyn, u);
  const Eigen::MatrixXd K = gain(res.prior.err_cov, obs);

  res.next.es = trg.es;
  res.next.psd_old = res.p2;
  res.next.track = update(res.prior, K, y, obs);
  res.next.track.t = t;
  return res;
}

}  // namespace coopkal
