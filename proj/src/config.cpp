#include "coopkal/config.hpp"

#include "coopkal/error.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

namespace coopkal {

namespace {

std::string where(const toml::node& n, const std::string& origin) {
  const auto& src = n.source();
  return origin + ":" + std::to_string(src.begin.line);
}

double get_double(const toml::node& n, const std::string& key, const std::string& origin) {
  if (auto v = n.value<double>()) return *v;
  throw ConfigError(where(n, origin) + ": " + key + " must be a number");
}

int get_int(const toml::node& n, const std::string& key, const std::string& origin) {
  if (n.is_integer()) return static_cast<int>(*n.value<std::int64_t>());
  throw ConfigError(where(n, origin) + ": " + key + " must be an integer");
}

const toml::array& get_array(const toml::node& n, const std::string& key, const std::string& origin) {
  if (const auto* a = n.as_array()) return *a;
  throw ConfigError(where(n, origin) + ": " + key + " must be an array");
}

std::array<double, 2> get_pair(const toml::node& n, const std::string& key, const std::string& origin) {
  const auto& a = get_array(n, key, origin);
  if (a.size() != 2) throw ConfigError(where(n, origin) + ": " + key + " must have two entries");
  return {get_double(a[0], key, origin), get_double(a[1], key, origin)};
}

}  // namespace

ExperimentConfig parse_config(const std::string& toml_text, const std::string& origin) {
  toml::table tbl;
  try {
    tbl = toml::parse(toml_text, origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << origin << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }

  ExperimentConfig cfg;
  for (const auto& [k, node] : tbl) {
    const std::string key(k.str());
    if (key == "dataset") {
      auto v = node.value<std::string>();
      if (!v) throw ConfigError(where(node, origin) + ": dataset must be a string");
      cfg.dataset = *v;
    } else if (key == "n_a") {
      cfg.n_a = get_int(node, key, origin);
    } else if (key == "n_b") {
      cfg.n_b = get_int(node, key, origin);
    } else if (key == "k") {
      cfg.k = get_int(node, key, origin);
    } else if (key == "period") {
      cfg.period = get_int(node, key, origin);
    } else if (key == "max_period") {
      cfg.max_period = get_int(node, key, origin);
    } else if (key == "t_train") {
      cfg.t_train = get_int(node, key, origin);
    } else if (key == "t_test") {
      cfg.t_test = get_int(node, key, origin);
    } else if (key == "sigma_w") {
      cfg.sigma_w.clear();
      for (const auto& e : get_array(node, key, origin)) cfg.sigma_w.push_back(get_double(e, key, origin));
    } else if (key == "sigma_v") {
      cfg.sigma_v = get_double(node, key, origin);
    } else if (key == "delta") {
      cfg.delta = get_double(node, key, origin);
    } else if (key == "eta") {
      cfg.eta = get_double(node, key, origin);
    } else if (key == "zeta") {
      cfg.zeta = get_double(node, key, origin);
    } else if (key == "d_a") {
      cfg.d_a = get_int(node, key, origin);
    } else if (key == "d_b") {
      cfg.d_b = get_int(node, key, origin);
    } else if (key == "missing_ratio") {
      cfg.missing_ratio = get_double(node, key, origin);
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& e : get_array(node, key, origin)) {
        const int s = get_int(e, key, origin);
        if (s < 0) throw ConfigError(where(e, origin) + ": seeds must be nonnegative");
        cfg.seeds.push_back(static_cast<std::uint64_t>(s));
      }
    } else if (key == "transport_mode") {
      auto v = node.value<std::string>();
      if (v && *v == "sqrt") {
        cfg.transport_mode = TransportMode::Sqrt;
      } else if (v && *v == "linear") {
        cfg.transport_mode = TransportMode::Linear;
      } else {
        throw ConfigError(where(node, origin) + ": transport_mode must be \"sqrt\" or \"linear\"");
      }
    } else if (key == "kernel_orders") {
      const auto& a = get_array(node, key, origin);
      if (a.size() != 2) throw ConfigError(where(node, origin) + ": kernel_orders must be [qn, qd]");
      cfg.kernel_orders = {get_int(a[0], key, origin), get_int(a[1], key, origin)};
    } else if (key == "psd_floor") {
      cfg.psd_floor = get_double(node, key, origin);
    } else if (key == "resample_mask") {
      auto v = node.value<bool>();
      if (!v) throw ConfigError(where(node, origin) + ": resample_mask must be a boolean");
      cfg.resample_mask = *v;
    } else if (key == "lat_range_a") {
      cfg.lat_range_a = get_pair(node, key, origin);
    } else if (key == "lat_range_b") {
      cfg.lat_range_b = get_pair(node, key, origin);
    } else {
      throw ConfigError(where(node, origin) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& spec) {
  auto num = [&](const std::string& s) -> std::uint64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("bad seed list '" + spec + "'");
    }
    return std::stoull(s);
  };
  std::vector<std::uint64_t> out;
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t lo = num(spec.substr(0, dots));
    const std::uint64_t hi = num(spec.substr(dots + 2));
    if (hi < lo) throw ConfigError("bad seed range '" + spec + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(num(tok));
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

}  // namespace coopkal
