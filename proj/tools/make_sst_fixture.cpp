// Writes a small SST-like dataset: monthly sea surface temperature on two
// latitude bands with a latitude-dependent seasonal cycle plus spatially
// correlated AR(1) anomalies.
//
//   make_sst_fixture <out_dir>

#include "coopkal/io.hpp"
#include "coopkal/transport.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_sst_fixture <out_dir>\n");
    return 2;
  }
  const std::filesystem::path out(argv[1]);
  std::filesystem::create_directories(out);

  constexpr int kNa = 150;         // candidates in 0..30 N
  constexpr int kNb = 60;          // candidates in 35..60 N
  constexpr int kT = 216;          // 18 years of months
  constexpr double kRho = 0.8;     // month-to-month anomaly persistence
  constexpr double kAnom = 0.5;    // anomaly std, degC
  constexpr double kLength = 8.0;  // anomaly correlation length, degrees
  constexpr int n = kNa + kNb;

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ua(0.0, 30.0), ub(35.0, 60.0), ulon(120.0, 200.0);
  std::normal_distribution<double> nd(0.0, 1.0);

  coopkal::RealDataset ds;
  ds.coords.resize(n, 2);
  for (int i = 0; i < n; ++i) ds.coords(i, 0) = i < kNa ? ua(rng) : ub(rng);
  for (int i = 0; i < n; ++i) ds.coords(i, 1) = ulon(rng);
  for (int i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "n%03d", i);
    ds.node_ids.emplace_back(id);
  }

  Eigen::MatrixXd C(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d2 = (ds.coords.row(i) - ds.coords.row(j)).squaredNorm();
      C(i, j) = std::exp(-d2 / (2.0 * kLength * kLength));
    }
  }
  const Eigen::MatrixXd R = coopkal::sqrtm_psd(C);

  auto draw = [&]() {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = nd(rng);
    return Eigen::VectorXd(R * z);
  };

  ds.signals.resize(n, kT);
  Eigen::VectorXd a = draw();
  const double w = 2.0 * std::numbers::pi / 12.0;
  for (int t = 0; t < kT; ++t) {
    if (t > 0) a = kRho * a + std::sqrt(1.0 - kRho * kRho) * draw();
    const double f = std::cos(w * t) + 0.4 * std::sin(2.0 * w * t);
    for (int i = 0; i < n; ++i) {
      const double lat = ds.coords(i, 0);
      const double v = 28.0 - 0.3 * lat + (1.0 + 0.12 * lat) * f + kAnom * a(i);
      ds.signals(i, t) = std::round(v * 1e4) / 1e4;
    }
  }
  for (int i = 0; i < n; ++i) {
    ds.coords(i, 0) = std::round(ds.coords(i, 0) * 1e4) / 1e4;
    ds.coords(i, 1) = std::round(ds.coords(i, 1) * 1e4) / 1e4;
  }

  coopkal::save_real_dataset(ds, (out / "signals.csv").string(), (out / "coords.csv").string());
  std::printf("wrote %d nodes x %d months to %s\n", n, kT, out.string().c_str());
  return 0;
}
