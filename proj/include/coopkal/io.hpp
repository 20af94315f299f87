#pragma once

#include "coopkal/graph.hpp"
#include "coopkal/harness.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace coopkal {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

struct SignalTable {
  std::vector<std::string> node_ids;
  Eigen::MatrixXd values;  // nodes x time
};

SignalTable read_signals_csv(const std::string& path);
void write_signals_csv(const std::string& path, const std::vector<std::string>& node_ids, const Eigen::MatrixXd& values);

// {period, phase0_time, mean_convention} next to a signal matrix
void write_signal_sidecar(const std::string& path, int period, long phase0_time, const std::string& mean_convention);

struct CoordTable {
  std::vector<std::string> node_ids;
  Eigen::MatrixXd coords;  // lat, lon (or y, x)
};

CoordTable read_coords_csv(const std::string& path);
void write_coords_csv(const std::string& path, const std::vector<std::string>& node_ids, const Eigen::MatrixXd& coords);

// Joins signals and coordinates on node id; coordinates must cover every signal row.
RealDataset load_real_dataset(const std::string& signals_path, const std::string& coords_path);
void save_real_dataset(const RealDataset& ds, const std::string& signals_path, const std::string& coords_path);

// Edge list u,v,weight plus a JSON header {"n": N}.
void write_graph(const Graph& g, const std::string& edges_path, const std::string& header_path);
Graph read_graph(const std::string& edges_path, const std::string& header_path);

}  // namespace coopkal
