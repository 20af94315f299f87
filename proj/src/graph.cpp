#include "coopkal/graph.hpp"

#include "coopkal/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <string>
#include <vector>

namespace coopkal {

Graph build_knn_graph(const Eigen::MatrixXd& points, int k) {
  const int n = static_cast<int>(points.rows());
  if (n < 2) throw ContractError("build_knn_graph: need at least 2 points");
  if (k < 1 || k >= n) throw ContractError("build_knn_graph: k must satisfy 1 <= k < n");
  if (points.cols() != 2) throw ContractError("build_knn_graph: points must be n x 2");

  Eigen::MatrixXd dist(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) dist(i, j) = (points.row(i) - points.row(j)).norm();
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!(dist(i, j) > 0.0)) {
        throw DataError("build_knn_graph: degenerate geometry, points " + std::to_string(i) +
                        " and " + std::to_string(j) + " coincide");
      }
    }
  }

  // neighbor lists, ties broken by index for determinism
  std::vector<std::vector<int>> nbr(n);
  double dsum = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<int> idx;
    idx.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j != i) idx.push_back(j);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return dist(i, a) < dist(i, b); });
    idx.resize(k);
    for (int j : idx) dsum += dist(i, j);
    nbr[i] = std::move(idx);
  }
  const double theta = dsum / (static_cast<double>(n) * k);

  Graph g;
  g.n = n;
  g.coords = points;
  g.weights = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j : nbr[i]) {
      const double d = dist(i, j);
      const double w = std::exp(-d * d / (2.0 * theta * theta));
      g.weights(i, j) = std::max(g.weights(i, j), w);
      g.weights(j, i) = std::max(g.weights(j, i), w);
    }
  }
  return g;
}

bool is_connected(const Graph& g) {
  if (g.n == 0) return true;
  std::vector<char> seen(g.n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v = 0; v < g.n; ++v) {
      if (!seen[v] && g.weights(u, v) > 0.0) {
        seen[v] = 1;
        ++count;
        q.push(v);
      }
    }
  }
  return count == g.n;
}

Graph random_sensor_graph(int n, int k, std::uint64_t seed, std::uint64_t* used_seed) {
  for (std::uint64_t s = seed; s < seed + 1000; ++s) {
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd pts(n, 2);
    for (int i = 0; i < n; ++i) {
      pts(i, 0) = unif(rng);
      pts(i, 1) = unif(rng);
    }
    Graph g = build_knn_graph(pts, k);
    if (is_connected(g)) {
      if (used_seed) *used_seed = s;
      return g;
    }
  }
  throw NumericalError("random_sensor_graph: no connected graph in 1000 draws");
}

Eigen::MatrixXd laplacian(const Graph& g) {
  Eigen::MatrixXd L = -g.weights;
  L.diagonal() = g.weights.rowwise().sum();
  return L;
}

Eigensystem eigendecompose(const Eigen::MatrixXd& L) {
  if (L.rows() != L.cols()) throw ContractError("eigendecompose: matrix not square");
  const double scale = std::max(1.0, L.cwiseAbs().maxCoeff());
  if ((L - L.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ContractError("eigendecompose: matrix not symmetric");
  }
  const int n = static_cast<int>(L.rows());
  Eigensystem es;
  if (n == 0) return es;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (L + L.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecompose: solver failed");
  es.eigenvalues = eig.eigenvalues();
  es.eigenvectors = eig.eigenvectors();

  // Laplacians are PSD, so negative eigenvalues are roundoff
  for (int i = 0; i < n; ++i) es.eigenvalues(i) = std::max(es.eigenvalues(i), 0.0);
  const double lmax = es.eigenvalues(n - 1);
  if (es.eigenvalues(0) <= 1e-9 * lmax) es.eigenvalues(0) = 0.0;

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double v = es.eigenvectors(i, j);
      if (std::abs(v) > 1e-12) {
        if (v < 0) es.eigenvectors.col(j) *= -1.0;
        break;
      }
    }
  }
  return es;
}

Eigen::VectorXd gft(const Eigensystem& es, const Eigen::VectorXd& x) {
  if (x.size() != es.size()) throw ContractError("gft: dimension mismatch");
  return es.eigenvectors.transpose() * x;
}

Eigen::VectorXd igft(const Eigensystem& es, const Eigen::VectorXd& xhat) {
  if (xhat.size() != es.size()) throw ContractError("igft: dimension mismatch");
  return es.eigenvectors * xhat;
}

}  // namespace coopkal
