#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coopkal/error.hpp"
#include "coopkal/graph.hpp"
#include "coopkal/stationary.hpp"
#include "coopkal/transport.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace coopkal;

namespace {

GaussianMoments diag_moments(const Eigen::VectorXd& d, const Eigen::VectorXd& mu) {
  return {mu, d.asDiagonal().toDenseMatrix()};
}

Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
  }
  return A * A.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

Eigen::VectorXd random_psd_vec(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 2.0);
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p(i) = u(rng);
  return p;
}

}  // namespace

TEST_CASE("wasserstein2: identity, diagonal oracle, mean shift") {
  const GaussianMoments a = diag_moments(Eigen::Vector2d(1, 4), Eigen::Vector2d::Zero());
  const GaussianMoments b = diag_moments(Eigen::Vector2d(4, 1), Eigen::Vector2d::Zero());
  CHECK(wasserstein2(a, a) <= 1e-12);
  CHECK(wasserstein2(a, b) == doctest::Approx(2.0).epsilon(1e-12));
  const GaussianMoments c = diag_moments(Eigen::Vector2d::Ones(), Eigen::Vector2d(1, 0));
  const GaussianMoments d = diag_moments(Eigen::Vector2d::Ones(), Eigen::Vector2d::Zero());
  CHECK(wasserstein2(c, d) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("wasserstein2: symmetry and zero on identity for random pairs") {
  std::mt19937_64 rng(1);
  for (int r = 0; r < 20; ++r) {
    const int n = 2 + r % 6;
    const GaussianMoments a{Eigen::VectorXd::Random(n), random_spd(n, rng)};
    const GaussianMoments b{Eigen::VectorXd::Random(n), random_spd(n, rng)};
    CHECK(std::abs(wasserstein2(a, b) - wasserstein2(b, a)) <= 1e-10 * std::max(1.0, wasserstein2(a, b)));
    CHECK(wasserstein2(a, a) <= 1e-10 * std::max(1.0, a.cov.trace()));
    CHECK(wasserstein2(a, b) >= 0.0);
  }
}

TEST_CASE("wasserstein2: rejects non-PSD covariance") {
  const GaussianMoments a = diag_moments(Eigen::Vector2d(1, -1), Eigen::Vector2d::Zero());
  const GaussianMoments b = diag_moments(Eigen::Vector2d(1, 1), Eigen::Vector2d::Zero());
  CHECK_THROWS_AS(wasserstein2(a, b), ContractError);
}

TEST_CASE("ot_map_general: identity and diagonal oracle") {
  const GaussianMoments a = diag_moments(Eigen::Vector2d(1, 4), Eigen::Vector2d(1, 2));
  const TransportMap id = ot_map_general(a, a);
  CHECK((id.Q - Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-12);
  CHECK(id.apply(Eigen::Vector2d(3, -1)).isApprox(Eigen::Vector2d(3, -1), 1e-12));

  const GaussianMoments b = diag_moments(Eigen::Vector2d(4, 1), Eigen::Vector2d::Zero());
  const TransportMap T = ot_map_general(diag_moments(Eigen::Vector2d(1, 4), Eigen::Vector2d::Zero()), b);
  CHECK(T.Q(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(T.Q(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(T.Q(0, 1)) <= 1e-12);
}

TEST_CASE("ot_map_general: pushforward on random N=6 pairs") {
  std::mt19937_64 rng(2);
  for (int r = 0; r < 20; ++r) {
    const GaussianMoments a{Eigen::VectorXd::Zero(6), random_spd(6, rng)};
    const GaussianMoments b{Eigen::VectorXd::Zero(6), random_spd(6, rng)};
    const TransportMap T = ot_map_general(a, b);
    CHECK((T.Q * a.cov * T.Q.transpose() - b.cov).norm() <= 1e-8 * b.cov.norm());
  }
}

TEST_CASE("ot_map_general: all-zero source is singular") {
  const GaussianMoments a = diag_moments(Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero());
  const GaussianMoments b = diag_moments(Eigen::Vector2d::Ones(), Eigen::Vector2d::Zero());
  CHECK_THROWS_AS(ot_map_general(a, b), NumericalError);
}

TEST_CASE("ot_map_spectral: equal psds give identity in both modes") {
  const Eigensystem es = eigendecompose(laplacian(random_sensor_graph(10, 3, 4)));
  std::mt19937_64 rng(3);
  const Eigen::VectorXd p = random_psd_vec(10, rng);
  for (TransportMode m : {TransportMode::Sqrt, TransportMode::Linear}) {
    const TransportMap T = ot_map_spectral(es, p, p, Eigen::VectorXd::Zero(10), Eigen::VectorXd::Zero(10), m);
    CHECK((T.Q - Eigen::MatrixXd::Identity(10, 10)).norm() <= 1e-12);
  }
}

TEST_CASE("ot_map_spectral: two node path in sqrt mode") {
  Eigen::MatrixXd L(2, 2);
  L << 1, -1, -1, 1;
  const Eigensystem es = eigendecompose(L);
  const Eigen::Vector2d p1(1, 4), p2(4, 1), mu = Eigen::Vector2d::Zero();
  const TransportMap T = ot_map_spectral(es, p1, p2, mu, mu);
  const Eigen::MatrixXd Qs = es.eigenvectors.transpose() * T.Q * es.eigenvectors;
  CHECK(Qs(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(Qs(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  const Eigen::MatrixXd S1 = spectral_covariance(es, p1), S2 = spectral_covariance(es, p2);
  CHECK((T.Q * S1 * T.Q.transpose() - S2).norm() <= 1e-12);
  const TransportMap G = ot_map_general({mu, S1}, {mu, S2});
  CHECK((G.Q - T.Q).norm() <= 1e-12);
}

TEST_CASE("ot_map_spectral: agrees with the general map on jointly diagonal pairs") {
  std::mt19937_64 rng(5);
  for (int r = 0; r < 50; ++r) {
    const int n = 2 + r % 12;
    const Eigensystem es = eigendecompose(laplacian(random_sensor_graph(n, std::min(3, n - 1), 1000 + static_cast<std::uint64_t>(r))));
    const Eigen::VectorXd p1 = random_psd_vec(n, rng), p2 = random_psd_vec(n, rng);
    const Eigen::VectorXd m1 = Eigen::VectorXd::Random(n), m2 = Eigen::VectorXd::Random(n);
    const TransportMap T = ot_map_spectral(es, p1, p2, m1, m2);
    const TransportMap G = ot_map_general({m1, spectral_covariance(es, p1)}, {m2, spectral_covariance(es, p2)});
    CHECK((T.Q - G.Q).norm() <= 1e-8 * std::max(1.0, G.Q.norm()));
    CHECK((T.Q - T.Q.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("ot_map_spectral: linear mode violates the pushforward") {
  Eigen::MatrixXd L(2, 2);
  L << 1, -1, -1, 1;
  const Eigensystem es = eigendecompose(L);
  const Eigen::Vector2d p1(1, 4), p2(4, 1), mu = Eigen::Vector2d::Zero();
  const TransportMap T = ot_map_spectral(es, p1, p2, mu, mu, TransportMode::Linear);
  const Eigen::MatrixXd S1 = spectral_covariance(es, p1), S2 = spectral_covariance(es, p2);
  const Eigen::MatrixXd Qs = es.eigenvectors.transpose() * T.Q * es.eigenvectors;
  CHECK(Qs(0, 0) == doctest::Approx(4.0));
  CHECK(Qs(1, 1) == doctest::Approx(0.25));
  CHECK((T.Q * S1 * T.Q.transpose() - S2).norm() > 0.1 * S2.norm());
}

TEST_CASE("ot_map_spectral: floor and singular source") {
  Eigen::MatrixXd L(2, 2);
  L << 1, -1, -1, 1;
  const Eigensystem es = eigendecompose(L);
  const Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  CHECK_THROWS_AS(ot_map_spectral(es, Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones(), mu, mu), NumericalError);
  const TransportMap T = ot_map_spectral(es, Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1), mu, mu,
                                         TransportMode::Sqrt, 1e-8);
  const Eigen::MatrixXd Qs = es.eigenvectors.transpose() * T.Q * es.eigenvectors;
  CHECK(Qs(1, 1) == doctest::Approx(1e4).epsilon(1e-9));
  CHECK_THROWS_AS(ot_map_spectral(es, Eigen::Vector3d::Ones(), Eigen::Vector2d::Ones(), mu, mu), ContractError);
}

TEST_CASE("transport map: apply identities") {
  std::mt19937_64 rng(6);
  const int n = 5;
  TransportMap T{Eigen::VectorXd::Random(n), Eigen::VectorXd::Random(n), random_spd(n, rng)};
  CHECK((T.apply(T.mu_from) - T.mu_to).norm() <= 1e-14);
  const Eigen::VectorXd x = Eigen::VectorXd::Random(n);
  CHECK(TransportMap::identity(n).apply(x) == x);
  const Eigen::VectorXd y = Eigen::VectorXd::Random(n);
  const double a = 0.7, b = -1.3;
  const Eigen::VectorXd lhs = T.apply(a * x + b * y - (a + b - 1.0) * T.mu_from);
  const Eigen::VectorXd rhs = a * T.apply(x) + b * T.apply(y) - (a + b - 1.0) * T.mu_to;
  CHECK((lhs - rhs).norm() <= 1e-12);
  CHECK_THROWS_AS(T.apply(Eigen::VectorXd::Zero(3)), ContractError);
}

TEST_CASE("sqrtm_psd squares back and clamps negatives") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd S = random_spd(7, rng);
  const Eigen::MatrixXd R = sqrtm_psd(S);
  CHECK((R * R - S).norm() <= 1e-10 * S.norm());
  const Eigen::MatrixXd D = Eigen::Vector2d(4.0, -1e-14).asDiagonal();
  const Eigen::MatrixXd RD = sqrtm_psd(D);
  CHECK(RD(0, 0) == doctest::Approx(2.0));
  CHECK(RD(1, 1) == 0.0);
}
