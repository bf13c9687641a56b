// SPDX-License-Identifier: Apache-2.0
#include "covertower/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "covertower/errors.hpp"

namespace covertower {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int x{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return x;
}

std::vector<std::string> split_list(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

template <class T, class F>
std::string join(const std::vector<T>& xs, const char* sep, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += f(xs[i]);
  }
  return out;
}

}  // namespace

double parse_scale(const std::string& expr) {
  const std::string e = lower(trim(expr));
  const std::string pre = "sqrt(";
  if (e.rfind(pre, 0) == 0 && e.back() == ')') {
    std::string inner = trim(e.substr(pre.size(), e.size() - pre.size() - 1));
    double factor = 1.0;
    const auto star = inner.find('*');
    if (star != std::string::npos) {
      const std::string a = trim(inner.substr(0, star)), b = trim(inner.substr(star + 1));
      if (b != "pi") throw ConfigError("lattice.scale: cannot read '" + expr + "'");
      factor = to_double("lattice.scale", a) * std::numbers::pi;
    } else if (inner == "pi") {
      factor = std::numbers::pi;
    } else {
      factor = to_double("lattice.scale", inner);
    }
    if (!(factor > 0.0)) throw ConfigError("lattice.scale must be positive");
    return std::sqrt(factor);
  }
  return to_double("lattice.scale", e);
}

double ExperimentConfig::scale() const { return parse_scale(lattice_scale); }

Tower ExperimentConfig::tower() const {
  if (tower_matrices.empty()) return make_product_tower(scale(), lattice_ratio, tower_depth);
  const double a = scale();
  return Tower(Lattice({a, 0.0}, {0.0, a}), tower_matrices);
}

BundleParams ExperimentConfig::bundle() const { return BundleParams::make(bundle_N, tower().d0()); }

TruncationPolicy ExperimentConfig::truncation() const { return {truncation_rtol, truncation_max_radius}; }

void ExperimentConfig::validate() const {
  auto positive = [](bool ok, const char* key) {
    if (!ok) throw ConfigError(std::string(key) + " must be positive");
  };
  positive(scale() > 0.0, "lattice.scale");
  positive(lattice_ratio >= 2, "lattice.ratio (>= 2)");
  positive(tower_depth >= 1, "tower.depth (>= 1)");
  positive(bundle_N >= 1, "bundle.N");
  positive(truncation_rtol > 0.0 && truncation_rtol < 1.0, "truncation.rtol (< 1)");
  positive(truncation_max_radius > 0.0, "truncation.max_radius");
  positive(quadrature_grid >= 16, "quadrature.grid (>= 16)");
  positive(variance_grid >= 8, "quadrature.variance_grid (>= 8)");
  positive(quadrature_budget > 0.0, "quadrature.budget");
  positive(stability_grid >= 8, "stability.grid (>= 8)");
  positive(sampling_n_samples >= 2, "sampling.n_samples (>= 2)");
  positive(sampling_bootstrap >= 0, "sampling.bootstrap");
  for (int n : stability_n_sweep) positive(n >= 1, "stability.n_sweep entries");
  try {
    const Tower t = tower();
    BundleParams::make(bundle_N, t.d0());
    for (int n : stability_n_sweep) BundleParams::make(n, t.d0());
    truncation().validate(t.level(0).tau);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
  auto ints = [](const std::vector<int>& v) { return join(v, ",", [](int x) { return std::to_string(x); }); };
  return {
      {"lattice.scale", lattice_scale},
      {"lattice.ratio", std::to_string(lattice_ratio)},
      {"tower.depth", std::to_string(tower_depth)},
      {"tower.matrices", join(tower_matrices, "; ",
                              [](const IntMat2& m) {
                                return std::to_string(m.a) + " " + std::to_string(m.b) + " " + std::to_string(m.c) +
                                       " " + std::to_string(m.d);
                              })},
      {"bundle.N", std::to_string(bundle_N)},
      {"truncation.rtol", fmt(truncation_rtol)},
      {"truncation.max_radius", fmt(truncation_max_radius)},
      {"quadrature.grid", std::to_string(quadrature_grid)},
      {"quadrature.variance_grid", std::to_string(variance_grid)},
      {"quadrature.budget", fmt(quadrature_budget)},
      {"stability.grid", std::to_string(stability_grid)},
      {"stability.n_sweep", ints(stability_n_sweep)},
      {"sampling.n_samples", std::to_string(sampling_n_samples)},
      {"sampling.master_seed", std::to_string(sampling_master_seed)},
      {"sampling.bootstrap", std::to_string(sampling_bootstrap)},
      {"testforms.presets", join(testforms_presets, ",", [](const std::string& s) { return s; })},
      {"output.dir", output_dir},
  };
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries()) out += k + " = " + v + "\n";
  return out;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key == "lattice.scale") {
      c.lattice_scale = v;
      parse_scale(v);
    } else if (key == "lattice.ratio") {
      c.lattice_ratio = to_int<int>(key, v);
    } else if (key == "tower.depth") {
      c.tower_depth = to_int<int>(key, v);
    } else if (key == "tower.matrices") {
      c.tower_matrices.clear();
      for (const auto& m : split_list(v, ';')) {
        std::stringstream ms(m);
        std::vector<std::int64_t> e;
        std::string tok;
        while (ms >> tok) e.push_back(to_int<std::int64_t>(key, tok));
        if (e.size() != 4) throw ConfigError("tower.matrices: each matrix needs 4 integers 'a b c d'");
        c.tower_matrices.push_back({e[0], e[1], e[2], e[3]});
      }
    } else if (key == "bundle.N") {
      c.bundle_N = to_int<int>(key, v);
    } else if (key == "truncation.rtol") {
      c.truncation_rtol = to_double(key, v);
    } else if (key == "truncation.max_radius") {
      c.truncation_max_radius = to_double(key, v);
    } else if (key == "quadrature.grid") {
      c.quadrature_grid = to_int<int>(key, v);
    } else if (key == "quadrature.variance_grid") {
      c.variance_grid = to_int<int>(key, v);
    } else if (key == "quadrature.budget") {
      c.quadrature_budget = to_double(key, v);
    } else if (key == "stability.grid") {
      c.stability_grid = to_int<int>(key, v);
    } else if (key == "stability.n_sweep") {
      c.stability_n_sweep.clear();
      for (const auto& s : split_list(v, ',')) c.stability_n_sweep.push_back(to_int<int>(key, s));
    } else if (key == "sampling.n_samples") {
      c.sampling_n_samples = to_int<int>(key, v);
    } else if (key == "sampling.master_seed") {
      c.sampling_master_seed = to_int<std::uint64_t>(key, v);
    } else if (key == "sampling.bootstrap") {
      c.sampling_bootstrap = to_int<int>(key, v);
    } else if (key == "testforms.presets") {
      c.testforms_presets = split_list(v, ',');
    } else if (key == "output.dir") {
      c.output_dir = v;
    } else {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace covertower
