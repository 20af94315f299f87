#include "coopkal/io.hpp"

#include "coopkal/error.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace coopkal {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& tok, const std::string& path, std::size_t line) {
  const std::string t = trim(tok);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw DataError(path + ":" + std::to_string(line) + ": bad number '" + t + "'");
  }
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

}  // namespace

SignalTable read_signals_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const auto header = split_csv(line);
  if (header.size() < 2 || trim(header[0]) != "node") throw DataError(path + ": header must start with node,t0,...");
  const std::size_t T = header.size() - 1;

  SignalTable tab;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto tok = split_csv(line);
    if (tok.size() != T + 1) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(T + 1) + " fields");
    }
    tab.node_ids.push_back(trim(tok[0]));
    std::vector<double> r(T);
    for (std::size_t j = 0; j < T; ++j) r[j] = parse_number(tok[j + 1], path, lineno);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");
  tab.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(T));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < T; ++j) tab.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return tab;
}

void write_signals_csv(const std::string& path, const std::vector<std::string>& node_ids,
                       const Eigen::MatrixXd& values) {
  if (static_cast<Eigen::Index>(node_ids.size()) != values.rows()) {
    throw ContractError("write_signals_csv: id count does not match rows");
  }
  std::ofstream out = open_out(path);
  out << "node";
  for (Eigen::Index t = 0; t < values.cols(); ++t) out << ",t" << t;
  out << "\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out << node_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < values.cols(); ++t) out << "," << format_double(values(i, t));
    out << "\n";
  }
}

void write_signal_sidecar(const std::string& path, int period, long phase0_time, const std::string& mean_convention) {
  nlohmann::json j;
  j["period"] = period;
  j["phase0_time"] = phase0_time;
  j["mean_convention"] = mean_convention;
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

CoordTable read_coords_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  auto header = split_csv(line);
  for (auto& h : header) h = trim(h);
  if (header.size() != 3 || header[0] != "node") throw DataError(path + ": header must be node,lat,lon or node,x,y");
  int lat_col = 0;
  if (header[1] == "lat" && header[2] == "lon") {
    lat_col = 1;
  } else if (header[1] == "x" && header[2] == "y") {
    lat_col = 2;
  } else {
    throw DataError(path + ": header must be node,lat,lon or node,x,y");
  }
  const int lon_col = 3 - lat_col;

  CoordTable tab;
  std::vector<std::array<double, 2>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto tok = split_csv(line);
    if (tok.size() != 3) throw DataError(path + ":" + std::to_string(lineno) + ": expected 3 fields");
    tab.node_ids.push_back(trim(tok[0]));
    rows.push_back({parse_number(tok[static_cast<std::size_t>(lat_col)], path, lineno),
                    parse_number(tok[static_cast<std::size_t>(lon_col)], path, lineno)});
  }
  tab.coords.resize(static_cast<Eigen::Index>(rows.size()), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    tab.coords(static_cast<Eigen::Index>(i), 0) = rows[i][0];
    tab.coords(static_cast<Eigen::Index>(i), 1) = rows[i][1];
  }
  return tab;
}

void write_coords_csv(const std::string& path, const std::vector<std::string>& node_ids, const Eigen::MatrixXd& coords) {
  std::ofstream out = open_out(path);
  out << "node,lat,lon\n";
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    out << node_ids[static_cast<std::size_t>(i)] << "," << format_double(coords(i, 0)) << ","
        << format_double(coords(i, 1)) << "\n";
  }
}

RealDataset load_real_dataset(const std::string& signals_path, const std::string& coords_path) {
  const SignalTable sig = read_signals_csv(signals_path);
  const CoordTable crd = read_coords_csv(coords_path);
  std::map<std::string, Eigen::Index> where;
  for (std::size_t i = 0; i < crd.node_ids.size(); ++i) {
    if (!where.emplace(crd.node_ids[i], static_cast<Eigen::Index>(i)).second) {
      throw DataError(coords_path + ": duplicate node id " + crd.node_ids[i]);
    }
  }
  RealDataset ds;
  ds.node_ids = sig.node_ids;
  ds.signals = sig.values;
  ds.coords.resize(sig.values.rows(), 2);
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < sig.node_ids.size(); ++i) {
    if (seen[sig.node_ids[i]]++) throw DataError(signals_path + ": duplicate node id " + sig.node_ids[i]);
    auto it = where.find(sig.node_ids[i]);
    if (it == where.end()) throw DataError(coords_path + ": no coordinates for node " + sig.node_ids[i]);
    ds.coords.row(static_cast<Eigen::Index>(i)) = crd.coords.row(it->second);
  }
  return ds;
}

void save_real_dataset(const RealDataset& ds, const std::string& signals_path, const std::string& coords_path) {
  write_signals_csv(signals_path, ds.node_ids, ds.signals);
  write_coords_csv(coords_path, ds.node_ids, ds.coords);
}

void write_graph(const Graph& g, const std::string& edges_path, const std::string& header_path) {
  std::ofstream out = open_out(edges_path);
  out << "u,v,weight\n";
  for (int u = 0; u < g.n; ++u) {
    for (int v = u + 1; v < g.n; ++v) {
      if (g.weights(u, v) != 0.0) out << u << "," << v << "," << format_double(g.weights(u, v)) << "\n";
    }
  }
  std::ofstream hdr = open_out(header_path);
  hdr << nlohmann::json{{"n", g.n}}.dump() << "\n";
}

Graph read_graph(const std::string& edges_path, const std::string& header_path) {
  std::ifstream hin = open_in(header_path);
  nlohmann::json j;
  try {
    hin >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(header_path + ": " + e.what());
  }
  if (!j.contains("n") || !j["n"].is_number_integer()) throw DataError(header_path + ": missing integer n");
  Graph g;
  g.n = j["n"].get<int>();
  if (g.n < 0) throw DataError(header_path + ": negative n");
  g.weights = Eigen::MatrixXd::Zero(g.n, g.n);

  std::ifstream in = open_in(edges_path);
  std::string line;
  std::getline(in, line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto tok = split_csv(line);
    if (tok.size() != 3) throw DataError(edges_path + ":" + std::to_string(lineno) + ": expected u,v,weight");
    const double uf = parse_number(tok[0], edges_path, lineno);
    const double vf = parse_number(tok[1], edges_path, lineno);
    const double w = parse_number(tok[2], edges_path, lineno);
    const int u = static_cast<int>(uf);
    const int v = static_cast<int>(vf);
    if (u != uf || v != vf || u < 0 || v < 0 || u >= g.n || v >= g.n || u == v || w < 0.0) {
      throw DataError(edges_path + ":" + std::to_string(lineno) + ": invalid edge");
    }
    g.weights(u, v) = w;
    g.weights(v, u) = w;
  }
  return g;
}

void write_report(const RunReport& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir + ": " + ec.message());
  const std::filesystem::path d(dir);
  {
    std::ofstream out = open_out((d / "mse_series.csv").string());
    out << "t,method,sigma_w,seed,mse\n";
    for (const SeriesRow& r : report.series) {
      out << r.t << "," << r.method << "," << format_double(r.sigma_w) << "," << r.seed << "," << format_double(r.mse)
          << "\n";
    }
  }
  {
    std::ofstream out = open_out((d / "mse_avg.csv").string());
    out << "method,sigma_w,mean_mse,std_mse\n";
    for (const AvgRow& r : report.avg) {
      out << r.method << "," << format_double(r.sigma_w) << "," << format_double(r.mean_mse) << ","
          << format_double(r.std_mse) << "\n";
    }
  }
  {
    nlohmann::json j;
    j["config_hash"] = report.config_hash;
    j["period"] = report.period;
    j["t_train"] = report.t_train;
    j["warnings"] = report.warnings;
    std::ofstream out = open_out((d / "run_info.json").string());
    out << j.dump(2) << "\n";
  }
}

}  // namespace coopkal
