#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace coopkal {

struct Graph {
  int n = 0;
  Eigen::MatrixXd coords;   // n x 2, may be empty
  Eigen::MatrixXd weights;  // symmetric, zero diagonal
};

struct Eigensystem {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // columns
  int size() const { return static_cast<int>(eigenvalues.size()); }
  double lambda_max() const { return eigenvalues.size() ? eigenvalues(eigenvalues.size() - 1) : 0.0; }
};

// Gaussian-kernel k-NN graph, exp(-d^2 / (2 theta^2)) with theta the mean
// k-NN distance, symmetrized by max.
Graph build_knn_graph(const Eigen::MatrixXd& points, int k);

bool is_connected(const Graph& g);

// Uniform points in the unit square, redrawn with seed+1, seed+2, ... until
// the k-NN graph is connected. The seed actually used goes to used_seed.
Graph random_sensor_graph(int n, int k, std::uint64_t seed, std::uint64_t* used_seed = nullptr);

Eigen::MatrixXd laplacian(const Graph& g);

Eigensystem eigendecompose(const Eigen::MatrixXd& L);

Eigen::VectorXd gft(const Eigensystem& es, const Eigen::VectorXd& x);
Eigen::VectorXd igft(const Eigensystem& es, const Eigen::VectorXd& xhat);

}  // namespace coopkal
