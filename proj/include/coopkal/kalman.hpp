#pragma once

#include "coopkal/graph.hpp"
#include "coopkal/kernel.hpp"
#include "coopkal/transport.hpp"

#include <Eigen/Dense>
#include <vector>

namespace coopkal {

struct ObservationModel {
  std::vector<int> observed_nodes;  // M, ordered
  double sigma_w = 0.0;

  void validate(int n) const;
  Eigen::MatrixXd C(int n) const;
  Eigen::VectorXd select(const Eigen::VectorXd& x) const;
};

struct StateDynamics {
  TransportMap transition;
  Eigen::MatrixXd B;
  double sigma_v = 0.0;

  static StateDynamics from_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double sigma_v);
};

struct KalmanTrack {
  Eigen::VectorXd estimate;
  Eigen::MatrixXd err_cov;
  long t = 0;
};

struct Prior {
  Eigen::VectorXd estimate;
  Eigen::MatrixXd err_cov;
  long t = 0;
};

KalmanTrack init_track(int n, const Eigen::VectorXd& x0, double delta);

Prior predict(const KalmanTrack& track, const StateDynamics& dyn, const Eigen::VectorXd& u);

Eigen::MatrixXd gain(const Eigen::MatrixXd& P_prior, const ObservationModel& obs);

KalmanTrack update(const Prior& prior, const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                   const ObservationModel& obs);

Eigen::VectorXd pi_control(const KalmanTrack& track, const Eigen::VectorXd& slot_mean, double eta);

struct CoopConfig {
  KernelOrders orders;
  TransportMode mode = TransportMode::Sqrt;
  double floor = kDefaultPsdFloor;
  double eta = 0.05;
  double sigma_v = 0.0;
};

struct SourceState {
  const Eigensystem* es = nullptr;
  Eigen::VectorXd psd_prev;  // p_src at t-1
};

struct TargetState {
  const Eigensystem* es = nullptr;
  Eigen::VectorXd psd_old;  // p1, the target PSD at its previous step
  KalmanTrack track;
};

// Slot statistics for one step: mu1 and the control reference at t-2, mu2 at t.
struct StepMoments {
  Eigen::VectorXd mu1;
  Eigen::VectorXd mu2;
  Eigen::VectorXd control_ref;
};

struct CoopResult {
  TargetState next;
  Eigen::VectorXd p2;
  TransportMap map;
  Prior prior;
};

// Transfer, predict, update for the target; the caller swaps roles afterwards.
CoopResult coop_step(const SourceState& src, const TargetState& trg, const ObservationModel& obs,
                     const Eigen::VectorXd& y, const StepMoments& mom, const CoopConfig& cfg, long t);

}  // namespace coopkal
