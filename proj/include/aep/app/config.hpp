#pragma once

// Run configuration: a sectioned key = value file.
//
//   [model]     N, lambda, beta, T, seed, replicas, angles (continuum | two_type), workers
//   [initial]   preset (uniform | cosine | two_type_waves | table), alpha, amplitude,
//               plus, minus, table (CSV with columns i, j, k, mass on a G x G x M grid)
//   [observe]   slices, grid, bins, p
//   [pde]       L, M, dt, T, ds_table, gamma_samples, limiter, scheme (euler | heun), cfl
//   [selfdiff]  grid, N, micro_time, replicas, low_density_replicas
//   [compare]   sizes
//   [exactcheck] suites (algebra, dirichlet, gap, irreducibility, ensembles)
//   [output]    dir
//
// The only environment override is AEP_SEED, which replaces model.seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <array>
#include <cctype>
#include <functional>
#include <memory>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "aep/dynamics.hpp"
#include "aep/pde.hpp"
#include "aep/rng.hpp"
#include "aep/sampling.hpp"

namespace aep::app {

/// Invalid configuration; `keys` lists every offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::vector<std::string> keys, const std::string& what)
      : std::invalid_argument(what), keys_(std::move(keys)) {}
  const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  std::vector<std::string> keys_;
};

struct InitialSpec {
  std::string preset = "uniform";
  double alpha = 0.5;
  double amplitude = 0.1;
  double plus = 0.3;
  double minus = 0.2;
  std::string table;
};

struct RunConfig {
  ModelParams model;
  int replicas = 1;
  unsigned workers = 0;  // 0: hardware concurrency
  InitialSpec initial;
  int slices = 11;  // observation times j T / (slices - 1)
  int grid = 8;
  int bins = 8;
  std::vector<int> cluster_p{1, 2, 3};
  PdeConfig pde;
  std::vector<double> ds_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  int ds_N = 64;
  double ds_micro_time = 200.0;
  int ds_replicas = 16;
  int ds_low_density_replicas = 20000;
  std::vector<int> compare_sizes{32, 64, 96};
  std::vector<std::string> exact_suites{"algebra", "dirichlet", "gap", "irreducibility", "ensembles"};
  std::string output_dir = "out";
  std::string source_text;  // normalized key = value listing, used for the config hash

  std::vector<double> schedule() const {
    std::vector<double> t;
    if (slices <= 1 || model.horizon == 0.0) return {0.0};
    for (int j = 0; j < slices; ++j) t.push_back(model.horizon * j / (slices - 1));
    return t;
  }

  std::uint64_t config_hash() const { return hash_name(source_text); }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const boost::property_tree::ptree& pt) {
    for (const auto& [section, body] : pt)
      for (const auto& [key, value] : body) values_[section + "." + key] = value.get_value<std::string>();
  }

  template <class T>
  void get(const std::string& key, T& out) {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return;
    try {
      out = convert<T>(it->second);
    } catch (const std::exception&) {
      bad(key, "cannot parse '" + it->second + "'");
    }
  }

  void bad(const std::string& key, const std::string& why) {
    keys_.push_back(key);
    msgs_.push_back(key + ": " + why);
  }

  void finish() {
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) bad(k, "unknown key");
    if (!keys_.empty()) {
      std::string all = "invalid configuration:";
      for (const auto& m : msgs_) all += "\n  " + m;
      throw ConfigError(keys_, all);
    }
  }

  /// Sorted INI text; parsing it again reproduces the same configuration.
  std::string normalized() const {
    std::string s, section;
    for (const auto& [k, v] : values_) {
      const auto dot = k.find('.');
      if (k.substr(0, dot) != section) {
        section = k.substr(0, dot);
        s += "[" + section + "]\n";
      }
      s += k.substr(dot + 1) + " = " + v + "\n";
    }
    return s;
  }

 private:
  template <class T>
  static T convert(const std::string& s) {
    if constexpr (std::is_same_v<T, std::string>) {
      return s;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
      if (s == "false" || s == "0" || s == "off" || s == "no") return false;
      throw std::invalid_argument("bool");
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      std::vector<double> v;
      for (const auto& x : split_list(s)) v.push_back(std::stod(x));
      return v;
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      std::vector<int> v;
      for (const auto& x : split_list(s)) v.push_back(std::stoi(x));
      return v;
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      return split_list(s);
    } else if constexpr (std::is_floating_point_v<T>) {
      std::size_t pos = 0;
      const T v = static_cast<T>(std::stod(s, &pos));
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return v;
    } else {
      std::size_t pos = 0;
      const auto v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing");
      return static_cast<T>(v);
    }
  }

  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
  std::vector<std::string> keys_, msgs_;
};

}  // namespace detail

inline RunConfig parse_config(const std::string& text, bool allow_env = true) {
  boost::property_tree::ptree pt;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError({}, std::string("malformed configuration: ") + e.what());
  }
  detail::Reader r(pt);
  RunConfig c;
  std::string angles = "continuum", scheme = "euler";
  r.get("model.N", c.model.N);
  r.get("model.lambda", c.model.lambda);
  r.get("model.beta", c.model.beta);
  r.get("model.T", c.model.horizon);
  r.get("model.seed", c.model.seed);
  r.get("model.replicas", c.replicas);
  r.get("model.angles", angles);
  r.get("model.workers", c.workers);
  r.get("initial.preset", c.initial.preset);
  r.get("initial.alpha", c.initial.alpha);
  r.get("initial.amplitude", c.initial.amplitude);
  r.get("initial.plus", c.initial.plus);
  r.get("initial.minus", c.initial.minus);
  r.get("initial.table", c.initial.table);
  r.get("observe.slices", c.slices);
  r.get("observe.grid", c.grid);
  r.get("observe.bins", c.bins);
  r.get("observe.p", c.cluster_p);
  c.pde.T = -1.0;
  r.get("pde.L", c.pde.L);
  r.get("pde.M", c.pde.M);
  r.get("pde.dt", c.pde.dt);
  r.get("pde.T", c.pde.T);
  r.get("pde.ds_table", c.pde.ds_path);
  r.get("pde.gamma_samples", c.pde.gamma_samples);
  r.get("pde.limiter", c.pde.limiter);
  r.get("pde.scheme", scheme);
  r.get("pde.cfl", c.pde.cfl);
  r.get("selfdiff.grid", c.ds_grid);
  r.get("selfdiff.N", c.ds_N);
  r.get("selfdiff.micro_time", c.ds_micro_time);
  r.get("selfdiff.replicas", c.ds_replicas);
  r.get("selfdiff.low_density_replicas", c.ds_low_density_replicas);
  r.get("compare.sizes", c.compare_sizes);
  r.get("exactcheck.suites", c.exact_suites);
  r.get("output.dir", c.output_dir);

  if (angles == "continuum") c.model.angles = AngleModel::continuum;
  else if (angles == "two_type") c.model.angles = AngleModel::two_type;
  else r.bad("model.angles", "expected continuum or two_type");
  if (scheme == "euler") c.pde.scheme = TimeScheme::euler;
  else if (scheme == "heun") c.pde.scheme = TimeScheme::heun;
  else r.bad("pde.scheme", "expected euler or heun");

  if (c.model.N < 2) r.bad("model.N", "must be at least 2");
  if (!(c.model.lambda >= 0.0)) r.bad("model.lambda", "must be nonnegative");
  if (c.model.lambda > c.model.N) r.bad("model.lambda", "must not exceed N");
  if (!(c.model.beta >= 0.0)) r.bad("model.beta", "must be nonnegative");
  if (!(c.model.horizon >= 0.0)) r.bad("model.T", "must be nonnegative");
  if (c.replicas < 1) r.bad("model.replicas", "must be positive");
  if (c.slices < 1) r.bad("observe.slices", "must be positive");
  if (c.grid < 1) r.bad("observe.grid", "must be positive");
  if (c.bins < 1) r.bad("observe.bins", "must be positive");
  if (c.model.angles == AngleModel::two_type && c.bins != 2) r.bad("observe.bins", "two-type runs use 2 bins");
  if (!std::is_sorted(c.cluster_p.begin(), c.cluster_p.end())) r.bad("observe.p", "must be sorted");
  for (int p : c.cluster_p)
    if (p < 1) r.bad("observe.p", "entries must be >= 1");
  if (!std::is_sorted(c.compare_sizes.begin(), c.compare_sizes.end())) r.bad("compare.sizes", "must be sorted");
  for (int n : c.compare_sizes)
    if (n % c.grid != 0) r.bad("compare.sizes", "every size must be divisible by observe.grid");
  if (c.ds_grid.empty() || c.ds_grid.front() != 0.0 || c.ds_grid.back() != 1.0 || !std::is_sorted(c.ds_grid.begin(), c.ds_grid.end()))
    r.bad("selfdiff.grid", "must be sorted and include 0 and 1");
  if (c.pde.L % c.grid != 0) r.bad("pde.L", "must be divisible by observe.grid");
  if (c.initial.alpha < 0.0 || c.initial.alpha >= 1.0) r.bad("initial.alpha", "must lie in [0, 1)");
  static const std::set<std::string> presets{"uniform", "cosine", "two_type_waves", "table"};
  if (!presets.count(c.initial.preset)) r.bad("initial.preset", "unknown preset");
  if (c.initial.preset == "table" && c.initial.table.empty()) r.bad("initial.table", "required by the table preset");
  static const std::set<std::string> suites{"algebra", "dirichlet", "gap", "irreducibility", "ensembles"};
  for (const auto& s : c.exact_suites)
    if (!suites.count(s)) r.bad("exactcheck.suites", "unknown suite " + s);

  if (allow_env)
    if (const char* env = std::getenv("AEP_SEED")) {
      try {
        c.model.seed = std::stoull(env);
      } catch (const std::exception&) {
        r.bad("AEP_SEED", "not an unsigned integer");
      }
    }
  c.pde.lambda = c.model.lambda;
  c.pde.beta = c.model.beta;
  c.pde.model = c.model.angles;
  c.pde.seed = c.model.seed;
  if (c.pde.T < 0.0) c.pde.T = c.model.horizon;
  if (c.model.angles == AngleModel::two_type) c.pde.M = 2;
  if (c.pde.M != c.bins) r.bad("pde.M", "must equal observe.bins so fields are comparable");
  try {
    c.pde.validate();
  } catch (const std::invalid_argument& e) {
    r.bad("pde", e.what());
  }
  c.source_text = r.normalized();
  r.finish();
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path, bool allow_env = true) {
  std::ifstream is(path);
  if (!is) throw ConfigError({}, "cannot read configuration " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), allow_env);
}

/// Initial profile named by the configuration.
inline InitialProfile make_profile(const InitialSpec& s, AngleModel model) {
  if (s.preset == "uniform") {
    if (model == AngleModel::two_type) return InitialProfile::two_type([a = s.alpha](double, double) { return a / 2; },
                                                                        [a = s.alpha](double, double) { return a / 2; });
    return InitialProfile::constant(AngleMeasure::uniform(s.alpha));
  }
  if (s.preset == "cosine") {
    auto rho = [a = s.alpha, b = s.amplitude](double u1, double) { return a + b * std::cos(kTwoPi * u1); };
    if (model == AngleModel::two_type)
      return InitialProfile::two_type([rho](double u1, double u2) { return rho(u1, u2) / 2; },
                                      [rho](double u1, double u2) { return rho(u1, u2) / 2; });
    return InitialProfile([rho](double u1, double u2) { return AngleMeasure::uniform(rho(u1, u2)); });
  }
  if (s.preset == "two_type_waves") {
    auto plus = [p = s.plus, b = s.amplitude](double u1, double) { return p + b * std::sin(kTwoPi * u1); };
    auto minus = [m = s.minus, b = s.amplitude](double, double u2) { return m + b * std::cos(kTwoPi * u2); };
    if (model == AngleModel::two_type) return InitialProfile::two_type(plus, minus);
    return InitialProfile([plus, minus](double u1, double u2) {
      return AngleMeasure::from_atoms({{0.0, plus(u1, u2)}, {kPi, minus(u1, u2)}});
    });
  }
  // table: rows i, j, k, mass on a G x G x M grid of bin masses
  std::ifstream is(s.table);
  if (!is) throw ConfigError({"initial.table"}, "cannot read initial table " + s.table);
  std::string line;
  std::vector<std::array<double, 4>> rows;
  int G = 0, M = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    std::array<double, 4> r{};
    char comma;
    std::istringstream ls(line);
    ls >> r[0] >> comma >> r[1] >> comma >> r[2] >> comma >> r[3];
    if (!ls) throw ConfigError({"initial.table"}, "malformed table row: " + line);
    G = std::max({G, static_cast<int>(r[0]) + 1, static_cast<int>(r[1]) + 1});
    M = std::max(M, static_cast<int>(r[2]) + 1);
    rows.push_back(r);
  }
  if (G == 0 || M == 0) throw ConfigError({"initial.table"}, "empty initial table");
  auto mass = std::make_shared<std::vector<double>>(static_cast<std::size_t>(G) * G * M, 0.0);
  for (const auto& r : rows)
    (*mass)[(static_cast<std::size_t>(r[0]) + static_cast<std::size_t>(G) * static_cast<std::size_t>(r[1])) * M +
            static_cast<std::size_t>(r[2])] = r[3];
  return InitialProfile([mass, G, M](double u1, double u2) {
    const int i = std::min(G - 1, static_cast<int>(u1 * G)), j = std::min(G - 1, static_cast<int>(u2 * G));
    const std::size_t c = static_cast<std::size_t>(i) + static_cast<std::size_t>(G) * j;
    return AngleMeasure::from_histogram(AngleBins(M), std::vector<double>(mass->begin() + c * M, mass->begin() + (c + 1) * M));
  });
}

}  // namespace aep::app
