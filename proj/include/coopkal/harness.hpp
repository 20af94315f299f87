#pragma once

#include "coopkal/graph.hpp"
#include "coopkal/kalman.hpp"
#include "coopkal/kernel.hpp"
#include "coopkal/transport.hpp"

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace coopkal {

struct ExperimentConfig {
  std::string dataset = "synthetic";  // synthetic | csv
  int n_a = 90;
  int n_b = 45;
  int k = 5;
  int period = 8;        // 0 asks the csv pipeline to estimate it
  int max_period = 24;   // candidate bound for period estimation
  int t_train = 200;
  int t_test = 40;
  std::vector<double> sigma_w{0.05, 0.10, 0.15};
  double sigma_v = 0.0;
  double delta = 1.0;
  double eta = 0.05;
  double zeta = 0.05;
  int d_a = 5;
  int d_b = 2;
  double missing_ratio = -1.0;  // >= 0 overrides d_a, d_b with round(ratio * N)
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  TransportMode transport_mode = TransportMode::Sqrt;
  KernelOrders kernel_orders{3, 3};
  double psd_floor = kDefaultPsdFloor;
  bool resample_mask = false;
  std::array<double, 2> lat_range_a{0.0, 30.0};
  std::array<double, 2> lat_range_b{35.0, 60.0};

  void validate() const;
  int missing(int which) const;  // d_A or d_B after applying missing_ratio
  std::string canonical() const;
};

struct DataSlot {
  std::vector<Eigen::MatrixXd> X;      // per phase, N x K, newest first
  std::vector<Eigen::MatrixXd> train;  // the l = 0 content

  int period() const { return static_cast<int>(X.size()); }
  Eigen::VectorXd mean(int phase) const { return X[static_cast<std::size_t>(phase)].rowwise().mean(); }
};

// Split an N x T_train block into per-phase slots (phase = t mod P).
DataSlot make_data_slot(const Eigen::MatrixXd& train, int period);

DataSlot update_data_slot(DataSlot slot, int phase, int cycle, const Eigen::VectorXd& estimate);

Eigen::VectorXd make_observation(const Eigen::VectorXd& x, const ObservationModel& obs, std::mt19937_64& rng);

struct MseResult {
  Eigen::VectorXd series;
  double average = 0.0;
};

MseResult mse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);

// One subgraph prepared for a run. Working signals X live in standardized
// units; raw = offset + scale .* X.
struct GraphData {
  Graph graph;
  Eigen::MatrixXd L;
  Eigensystem es;
  Eigen::MatrixXd X;
  Eigen::VectorXd offset;
  Eigen::VectorXd scale;
  std::vector<int> nodes;  // rows of the source dataset (csv only)
  std::uint64_t graph_seed = 0;
};

struct RunInput {
  std::array<GraphData, 2> g;
  int period = 0;
  int t_train = 0;
};

inline const std::array<std::string, 3> kMethods{"proposed", "tikhonov", "wiener"};

struct RunOutput {
  std::map<std::string, std::vector<double>> series;  // method -> per-step MSE
  std::vector<int> schedule;                          // target graph per step
  std::array<int, 2> observed_steps{0, 0};
  std::array<Eigen::MatrixXd, 2> estimates;           // proposed estimates per graph, raw units
  std::vector<std::string> failures;                  // numerical breakdowns; later steps are NaN
};

RunOutput run_alternating(const RunInput& in, const ExperimentConfig& cfg, std::uint64_t seed, double sigma_w);

struct RealDataset {
  std::vector<std::string> node_ids;
  Eigen::MatrixXd coords;   // N x 2: lat (or y), lon (or x)
  Eigen::MatrixXd signals;  // N x T raw readings
};

RunInput make_synthetic_input(const ExperimentConfig& cfg, std::uint64_t seed);
RunInput make_real_input(const RealDataset& ds, const ExperimentConfig& cfg, std::uint64_t seed,
                         std::vector<std::string>* warnings = nullptr);

struct SeriesRow {
  int t;
  std::string method;
  double sigma_w;
  std::uint64_t seed;
  double mse;
};

struct AvgRow {
  std::string method;
  double sigma_w;
  double mean_mse;
  double std_mse;
};

struct RunReport {
  std::vector<SeriesRow> series;
  std::vector<AvgRow> avg;
  std::string config_hash;
  int period = 0;
  int t_train = 0;
  std::vector<std::string> warnings;

  double mean_of(const std::string& method, double sigma_w) const;
};

RunReport run_synthetic_experiment(const ExperimentConfig& cfg);
RunReport run_realdata_experiment(const ExperimentConfig& cfg, const RealDataset& ds);

// mse_series.csv, mse_avg.csv, run_info.json
void write_report(const RunReport& report, const std::string& dir);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace coopkal
