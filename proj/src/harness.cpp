#include "coopkal/harness.hpp"

#include "coopkal/baselines.hpp"
#include "coopkal/error.hpp"
#include "coopkal/io.hpp"
#include "coopkal/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include <spdlog/spdlog.h>

namespace coopkal {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over (seed, stream)
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + stream * 0xBF58476D1CE4E5B9ULL + 0x94D049BB133111EBULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (dataset != "synthetic" && dataset != "csv") fail("dataset must be \"synthetic\" or \"csv\"");
  if (n_a < 2 || n_b < 2) fail("n_a and n_b must be >= 2");
  if (k < 1 || k >= std::min(n_a, n_b)) fail("k must satisfy 1 <= k < min(n_a, n_b)");
  if (period < 0 || period == 1) fail("period must be >= 2 (or 0 to estimate)");
  if (dataset == "synthetic") {
    if (period == 0) fail("synthetic runs need an explicit period");
    if (period % 4 != 0) fail("synthetic period must be a multiple of 4");
  }
  if (max_period < 2) fail("max_period must be >= 2");
  if (t_train < 2 || t_test < 1) fail("t_train must be >= 2 and t_test >= 1");
  if (period > 0 && t_train % period != 0) fail("t_train must be divisible by period");
  if (period > 0 && t_train / period < 2) fail("t_train / period must be >= 2");
  if (sigma_w.empty()) fail("sigma_w list is empty");
  for (double s : sigma_w) {
    if (!(s >= 0.0)) fail("sigma_w entries must be >= 0");
  }
  if (!(sigma_v >= 0.0)) fail("sigma_v must be >= 0");
  if (!(delta > 0.0)) fail("delta must be > 0");
  if (!(zeta >= 0.0)) fail("zeta must be >= 0");
  if (!std::isfinite(eta)) fail("eta must be finite");
  if (missing(0) < 0 || missing(0) >= n_a) fail("d_a must satisfy 0 <= d_a < n_a");
  if (missing(1) < 0 || missing(1) >= n_b) fail("d_b must satisfy 0 <= d_b < n_b");
  if (seeds.empty()) fail("seeds list is empty");
  if (kernel_orders.qn < 0 || kernel_orders.qd < 0) fail("kernel_orders must be nonnegative");
  if (!(psd_floor > 0.0 && psd_floor < 1.0)) fail("psd_floor must be in (0, 1)");
  if (lat_range_a[0] >= lat_range_a[1] || lat_range_b[0] >= lat_range_b[1]) fail("lat ranges must be increasing");
  if (dataset == "csv" && lat_range_a[1] >= lat_range_b[0] && lat_range_b[1] >= lat_range_a[0]) {
    fail("lat_range_a and lat_range_b overlap, node sets would not be disjoint");
  }
}

int ExperimentConfig::missing(int which) const {
  const int n = which == 0 ? n_a : n_b;
  if (missing_ratio >= 0.0) return std::max(1, static_cast<int>(std::lround(missing_ratio * n)));
  return which == 0 ? d_a : d_b;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << "dataset=" << dataset << ";n_a=" << n_a << ";n_b=" << n_b << ";k=" << k << ";period=" << period
     << ";max_period=" << max_period << ";t_train=" << t_train << ";t_test=" << t_test << ";sigma_w=";
  for (double s : sigma_w) os << s << ",";
  os << ";sigma_v=" << sigma_v << ";delta=" << delta << ";eta=" << eta << ";zeta=" << zeta << ";d_a=" << d_a
     << ";d_b=" << d_b << ";missing_ratio=" << missing_ratio << ";seeds=";
  for (auto s : seeds) os << s << ",";
  os << ";transport_mode=" << (transport_mode == TransportMode::Sqrt ? "sqrt" : "linear") << ";kernel_orders="
     << kernel_orders.qn << "," << kernel_orders.qd << ";psd_floor=" << psd_floor
     << ";resample_mask=" << resample_mask << ";lat_range_a=" << lat_range_a[0] << "," << lat_range_a[1]
     << ";lat_range_b=" << lat_range_b[0] << "," << lat_range_b[1];
  return os.str();
}

DataSlot make_data_slot(const Eigen::MatrixXd& train, int period) {
  const Eigen::Index T = train.cols();
  if (period < 1 || T % period != 0) throw ContractError("make_data_slot: T_train must be divisible by the period");
  const Eigen::Index K = T / period;
  DataSlot slot;
  for (int p = 0; p < period; ++p) {
    Eigen::MatrixXd Xp(train.rows(), K);
    // newest first: column 0 holds the latest instance t = (K-1) P + p
    for (Eigen::Index j = 0; j < K; ++j) Xp.col(j) = train.col((K - 1 - j) * period + p);
    slot.X.push_back(Xp);
  }
  slot.train = slot.X;
  return slot;
}

DataSlot update_data_slot(DataSlot slot, int phase, int cycle, const Eigen::VectorXd& estimate) {
  if (phase < 0 || phase >= slot.period()) throw ContractError("update_data_slot: phase out of range");
  auto& Xp = slot.X[static_cast<std::size_t>(phase)];
  if (estimate.size() != Xp.rows()) throw ContractError("update_data_slot: dimension mismatch");
  if (cycle == 0) {
    Xp = slot.train[static_cast<std::size_t>(phase)];
    return slot;
  }
  const Eigen::Index K = Xp.cols();
  if (K > 1) {
    const Eigen::MatrixXd keep = Xp.leftCols(K - 1);
    Xp.rightCols(K - 1) = keep;
  }
  Xp.col(0) = estimate;
  return slot;
}

Eigen::VectorXd make_observation(const Eigen::VectorXd& x, const ObservationModel& obs, std::mt19937_64& rng) {
  obs.validate(static_cast<int>(x.size()));
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd y = obs.select(x);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += obs.sigma_w * nd(rng);
  return y;
}

MseResult mse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw ContractError("mse: shape mismatch");
  }
  MseResult r;
  r.series = (truth - estimate).colwise().squaredNorm().transpose() / static_cast<double>(truth.rows());
  r.average = r.series.size() ? r.series.mean() : 0.0;
  return r;
}

namespace {

std::vector<int> draw_observed(int n, int missing, std::mt19937_64& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  // partial Fisher-Yates keeps the draw independent of the standard library's shuffle
  for (int i = 0; i < missing; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<int> obs(idx.begin() + missing, idx.end());
  std::sort(obs.begin(), obs.end());
  return obs;
}

int wrap(long t, int P) { return static_cast<int>(((t % P) + P) % P); }

void finish_graph(GraphData& gd) {
  gd.L = laplacian(gd.graph);
  gd.es = eigendecompose(gd.L);
}

}  // namespace

RunOutput run_alternating(const RunInput& in, const ExperimentConfig& cfg, std::uint64_t seed, double sigma_w) {
  const int P = in.period;
  const int Ttr = in.t_train;
  const int Tte = cfg.t_test;
  for (const auto& gd : in.g) {
    if (gd.X.cols() < Ttr + Tte) throw DataError("run_alternating: signal shorter than t_train + t_test");
  }
  if (Ttr % P != 0 || Ttr / P < 2) throw ConfigError("run_alternating: t_train must hold at least two cycles");

  std::array<DataSlot, 2> slots;
  std::array<ObservationModel, 2> obs;
  std::mt19937_64 mask_rng(derive_seed(seed, 5));
  std::mt19937_64 noise_rng(derive_seed(seed, 6));
  for (int g = 0; g < 2; ++g) {
    slots[g] = make_data_slot(in.g[g].X.leftCols(Ttr), P);
    obs[g].observed_nodes = draw_observed(static_cast<int>(in.g[g].X.rows()), cfg.missing(g), mask_rng);
    obs[g].sigma_w = sigma_w;
  }

  CoopConfig cc;
  cc.orders = cfg.kernel_orders;
  cc.mode = cfg.transport_mode;
  cc.floor = cfg.psd_floor;
  cc.eta = cfg.eta;
  cc.sigma_v = cfg.sigma_v;

  std::array<TargetState, 2> state;
  std::array<bool, 2> started{false, false};
  bool alive = true;
  bool wiener_alive = true;
  RunOutput out;
  for (int g = 0; g < 2; ++g) out.estimates[g] = Eigen::MatrixXd::Zero(in.g[g].X.rows(), 0);

  for (int tt = 0; tt < Tte; ++tt) {
    const long t = Ttr + tt;
    const int g = tt % 2;
    const int s = 1 - g;
    const GraphData& gd = in.g[g];
    const int n = gd.es.size();
    const int ph = wrap(t, P);
    const int ph_src = wrap(t - 1, P);
    const int ph_old = wrap(t - 2, P);

    if (cfg.resample_mask && tt >= 2) {
      obs[g].observed_nodes = draw_observed(n, cfg.missing(g), mask_rng);
    }

    if (!started[g]) {
      const Eigen::MatrixXd& Xold = slots[g].X[static_cast<std::size_t>(ph_old)];
      state[g].es = &gd.es;
      state[g].track = init_track(n, Xold.col(0), cfg.delta);
      state[g].track.t = t - 2;
      state[g].psd_old = estimate_psd(Xold, gd.es).psd;
      started[g] = true;
    }

    StepMoments mom;
    mom.mu1 = slots[g].mean(ph_old);
    mom.mu2 = slots[g].mean(ph);
    mom.control_ref = mom.mu1;

    const Eigen::VectorXd x = gd.X.col(t);
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::VectorXd y = obs[g].select(x);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += sigma_w * nd(noise_rng);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd x_kf = Eigen::VectorXd::Constant(n, nan);
    Eigen::VectorXd x_gw = Eigen::VectorXd::Constant(n, nan);
    const Eigen::VectorXd x_tk = tikhonov_estimate(gd.L, obs[g], y, cfg.zeta);

    // A method that breaks down numerically is reported as NaN from then on;
    // the others keep running.
    std::optional<Eigen::VectorXd> p2;
    SourceState src;
    src.es = &in.g[s].es;
    try {
      src.psd_prev = estimate_psd(slots[s].X[static_cast<std::size_t>(ph_src)], in.g[s].es).psd;
      if (alive) {
        CoopResult cr = coop_step(src, state[g], obs[g], y, mom, cc, t);
        if (!cr.next.track.estimate.allFinite() || !cr.next.track.err_cov.allFinite()) {
          throw NumericalError("coop_step: non-finite estimate");
        }
        p2 = cr.p2;
        state[g] = std::move(cr.next);
        x_kf = state[g].track.estimate;
      }
    } catch (const NumericalError& e) {
      if (alive) {
        out.failures.push_back("proposed diverged at step " + std::to_string(tt) + ": " + e.what());
        alive = false;
      }
    }
    try {
      if (!p2) p2 = transfer_psd(*src.es, src.psd_prev, gd.es, cfg.kernel_orders);
      x_gw = wiener_estimate(gd.es, *p2, mom.mu2, obs[g], y, cfg.psd_floor);
    } catch (const NumericalError& e) {
      if (wiener_alive) out.failures.push_back("wiener failed at step " + std::to_string(tt) + ": " + e.what());
      wiener_alive = false;
    }

    if (alive) slots[g] = update_data_slot(std::move(slots[g]), ph, tt / P, x_kf);

    const std::array<const Eigen::VectorXd*, 3> e{&x_kf, &x_tk, &x_gw};
    const Eigen::VectorXd raw_truth = gd.offset + gd.scale.cwiseProduct(x);
    for (std::size_t m = 0; m < 3; ++m) {
      const Eigen::VectorXd raw = gd.offset + gd.scale.cwiseProduct(*e[m]);
      out.series[kMethods[m]].push_back((raw_truth - raw).squaredNorm() / n);
      if (m == 0) {
        auto& E = out.estimates[static_cast<std::size_t>(g)];
        E.conservativeResize(Eigen::NoChange, E.cols() + 1);
        E.rightCols(1) = raw;
      }
    }
    out.schedule.push_back(g);
    ++out.observed_steps[static_cast<std::size_t>(g)];
  }
  return out;
}

RunInput make_synthetic_input(const ExperimentConfig& cfg, std::uint64_t seed) {
  RunInput in;
  in.period = cfg.period;
  in.t_train = cfg.t_train;
  const int T = cfg.t_train + cfg.t_test;
  const std::array<int, 2> sizes{cfg.n_a, cfg.n_b};
  for (int g = 0; g < 2; ++g) {
    GraphData& gd = in.g[g];
    const std::uint64_t gseed = derive_seed(seed, 1 + static_cast<std::uint64_t>(g));
    gd.graph = random_sensor_graph(sizes[g], cfg.k, gseed, &gd.graph_seed);
    if (gd.graph_seed != gseed) spdlog::info("graph {} redrawn with seed {} (disconnected)", g, gd.graph_seed);
    finish_graph(gd);
    const CyclicPsd bank = synth_psd_bank(gd.es, cfg.period);
    std::mt19937_64 rng(derive_seed(seed, 3 + static_cast<std::uint64_t>(g)));
    gd.X.resize(sizes[g], T);
    for (int t = 0; t < T; ++t) gd.X.col(t) = sample_cgwss(gd.es, bank, t, rng);
    gd.offset = Eigen::VectorXd::Zero(sizes[g]);
    gd.scale = Eigen::VectorXd::Ones(sizes[g]);
  }
  return in;
}

RunInput make_real_input(const RealDataset& ds, const ExperimentConfig& cfg, std::uint64_t seed,
                         std::vector<std::string>* warnings) {
  const Eigen::Index Nall = ds.signals.rows();
  const Eigen::Index T = ds.signals.cols();
  if (ds.coords.rows() != Nall || ds.coords.cols() != 2) throw DataError("real data: coords do not match signals");
  if (cfg.t_train + cfg.t_test > T) throw DataError("real data: t_train + t_test exceeds the series length");
  if (!ds.signals.allFinite() || !ds.coords.allFinite()) throw DataError("real data: non-finite values");

  const std::array<std::array<double, 2>, 2> ranges{cfg.lat_range_a, cfg.lat_range_b};
  const std::array<int, 2> sizes{cfg.n_a, cfg.n_b};
  std::array<std::vector<int>, 2> cand;
  for (int g = 0; g < 2; ++g) {
    for (Eigen::Index i = 0; i < Nall; ++i) {
      const double lat = ds.coords(i, 0);
      if (lat >= ranges[g][0] && lat <= ranges[g][1]) cand[g].push_back(static_cast<int>(i));
    }
    if (static_cast<int>(cand[g].size()) < sizes[g]) {
      throw DataError("real data: latitude range " + std::to_string(g) + " holds only " +
                      std::to_string(cand[g].size()) + " nodes");
    }
  }

  RunInput in;
  for (int g = 0; g < 2; ++g) {
    GraphData& gd = in.g[g];
    bool ok = false;
    for (std::uint64_t attempt = 0; attempt < 1000 && !ok; ++attempt) {
      const std::uint64_t gseed = derive_seed(seed, 1 + static_cast<std::uint64_t>(g)) + attempt;
      std::mt19937_64 rng(gseed);
      std::vector<int> pool = cand[g];
      for (int i = 0; i < sizes[g]; ++i) {
        std::uniform_int_distribution<int> pick(i, static_cast<int>(pool.size()) - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
      }
      std::vector<int> nodes(pool.begin(), pool.begin() + sizes[g]);
      std::sort(nodes.begin(), nodes.end());
      Eigen::MatrixXd pts(sizes[g], 2);
      for (int i = 0; i < sizes[g]; ++i) {
        pts(i, 0) = ds.coords(nodes[static_cast<std::size_t>(i)], 1);
        pts(i, 1) = ds.coords(nodes[static_cast<std::size_t>(i)], 0);
      }
      Graph gr = build_knn_graph(pts, cfg.k);
      if (is_connected(gr)) {
        gd.graph = std::move(gr);
        gd.nodes = std::move(nodes);
        gd.graph_seed = gseed;
        ok = true;
      } else {
        spdlog::info("graph {} node draw {} disconnected, redrawing", g, attempt);
      }
    }
    if (!ok) throw NumericalError("real data: no connected k-NN graph in 1000 node draws");
  }
  {
    std::vector<int> a = in.g[0].nodes, b = in.g[1].nodes, both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    if (!both.empty()) throw DataError("real data: node sets are not disjoint");
  }

  // period from the joint training stream
  int P = cfg.period;
  if (P == 0) {
    Eigen::MatrixXd stream(cfg.n_a + cfg.n_b, cfg.t_train);
    stream << ds.signals(in.g[0].nodes, Eigen::seqN(0, cfg.t_train)),
        ds.signals(in.g[1].nodes, Eigen::seqN(0, cfg.t_train));
    const PeriodEstimate pe = estimate_period(stream, cfg.max_period);
    if (pe.flat) throw DataError("real data: flat training stream, period undefined");
    P = pe.period;
  }
  int Ttr = cfg.t_train;
  if (Ttr % P != 0) {
    Ttr = (Ttr / P) * P;
    const std::string w = "t_train " + std::to_string(cfg.t_train) + " not divisible by period " +
                          std::to_string(P) + ", rounded down to " + std::to_string(Ttr);
    spdlog::warn("{}", w);
    if (warnings) warnings->push_back(w);
  }
  if (Ttr / P < 2) throw DataError("real data: fewer than two training cycles for period " + std::to_string(P));
  in.period = P;
  in.t_train = Ttr;

  for (int g = 0; g < 2; ++g) {
    GraphData& gd = in.g[g];
    finish_graph(gd);
    const Eigen::MatrixXd raw = ds.signals(gd.nodes, Eigen::seqN(0, Ttr + cfg.t_test));
    const Eigen::MatrixXd tr = raw.leftCols(Ttr);
    gd.offset = tr.rowwise().mean();
    gd.scale = ((tr.colwise() - gd.offset).array().square().rowwise().sum() / static_cast<double>(Ttr)).sqrt();
    for (Eigen::Index i = 0; i < gd.scale.size(); ++i) {
      if (!(gd.scale(i) > 0.0)) throw DataError("real data: node with constant training signal");
    }
    gd.X = (raw.colwise() - gd.offset).array().colwise() / gd.scale.array();
  }
  return in;
}

double RunReport::mean_of(const std::string& method, double sigma_w) const {
  for (const AvgRow& r : avg) {
    if (r.method == method && r.sigma_w == sigma_w) return r.mean_mse;
  }
  throw ContractError("RunReport::mean_of: no such row");
}

namespace {

std::string hash_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

template <class MakeInput>
RunReport run_experiment(const ExperimentConfig& cfg, MakeInput make) {
  cfg.validate();
  RunReport rep;
  rep.config_hash = hash_hex(cfg.canonical());
  // per sigma_w, per method: one average per seed
  std::map<std::pair<std::size_t, std::string>, std::vector<double>> per_seed;
  std::map<std::size_t, std::vector<SeriesRow>> rows;
  for (std::uint64_t seed : cfg.seeds) {
    const RunInput in = make(seed, rep.warnings);
    rep.period = in.period;
    rep.t_train = in.t_train;
    for (std::size_t si = 0; si < cfg.sigma_w.size(); ++si) {
      const double sw = cfg.sigma_w[si];
      const RunOutput out = run_alternating(in, cfg, seed, sw);
      for (const std::string& f : out.failures) {
        const std::string w = "seed " + std::to_string(seed) + " sigma_w " + format_double(sw) + ": " + f;
        spdlog::warn("{}", w);
        rep.warnings.push_back(w);
      }
      for (const std::string& m : kMethods) {
        const std::vector<double>& v = out.series.at(m);
        for (std::size_t t = 0; t < v.size(); ++t) rows[si].push_back({static_cast<int>(t), m, sw, seed, v[t]});
        per_seed[{si, m}].push_back(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()));
      }
    }
  }
  for (std::size_t si = 0; si < cfg.sigma_w.size(); ++si) {
    auto& r = rows[si];
    std::stable_sort(r.begin(), r.end(), [](const SeriesRow& a, const SeriesRow& b) { return a.seed < b.seed; });
    rep.series.insert(rep.series.end(), r.begin(), r.end());
  }
  for (const std::string& m : kMethods) {
    for (std::size_t si = 0; si < cfg.sigma_w.size(); ++si) {
      const std::vector<double>& v = per_seed[{si, m}];
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
      rep.avg.push_back({m, cfg.sigma_w[si], mean, sd});
    }
  }
  return rep;
}

}  // namespace

RunReport run_synthetic_experiment(const ExperimentConfig& cfg) {
  if (cfg.dataset != "synthetic") throw ConfigError("run_synthetic_experiment: dataset must be synthetic");
  return run_experiment(cfg, [&](std::uint64_t seed, std::vector<std::string>&) {
    return make_synthetic_input(cfg, seed);
  });
}

RunReport run_realdata_experiment(const ExperimentConfig& cfg, const RealDataset& ds) {
  if (cfg.dataset != "csv") throw ConfigError("run_realdata_experiment: dataset must be csv");
  return run_experiment(cfg, [&](std::uint64_t seed, std::vector<std::string>& warnings) {
    std::vector<std::string> w;
    RunInput in = make_real_input(ds, cfg, seed, &w);
    for (auto& s : w) {
      if (std::find(warnings.begin(), warnings.end(), s) == warnings.end()) warnings.push_back(s);
    }
    return in;
  });
}

}  // namespace coopkal
