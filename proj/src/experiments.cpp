// SPDX-License-Identifier: Apache-2.0
#include "covertower/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>

#include "covertower/currents.hpp"
#include "covertower/errors.hpp"
#include "covertower/quadrature.hpp"

namespace covertower {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint32_t kEquidistStream = 0x100;
constexpr std::uint32_t kVarianceStream = 0x200;
constexpr std::uint32_t kAsConvStream = 0x300;

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw ConfigError("cannot write '" + path.string() + "'");
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::string fd(double x) { return format_double(x); }
std::string fi(long long x) { return std::to_string(x); }

fs::path prepare(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out.string() + "': " + ec.message());
  return out;
}

std::vector<TestForm> preset_forms(const ExperimentConfig& cfg, const Tower& tower, bool with_const) {
  std::vector<TestForm> forms;
  if (with_const) forms.push_back(TestForm::preset(tower.base(), "const"));
  for (const auto& id : cfg.testforms_presets) {
    if (with_const && id == "const") continue;
    forms.push_back(TestForm::preset(tower.base(), id));
  }
  return forms;
}

Check check(std::string name, bool pass, std::string detail, bool statistical = false) {
  return {std::move(name), pass, statistical, std::move(detail)};
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* version() { return COVERTOWER_VERSION; }

bool RunResult::ok() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

int RunResult::exit_code() const {
  bool stat = false;
  for (const auto& c : checks) {
    if (c.pass) continue;
    if (!c.statistical) return 3;
    stat = true;
  }
  return stat ? 2 : 0;
}

void write_manifest(const ExperimentConfig& cfg, const RunResult& result, const fs::path& out) {
  json m;
  m["experiment"] = result.experiment;
  m["version"] = version();
  json c = json::object();
  for (const auto& [k, v] : cfg.entries()) c[k] = v;
  m["config"] = c;
  json checks = json::array();
  for (const auto& ch : result.checks) {
    checks.push_back({{"name", ch.name}, {"pass", ch.pass}, {"statistical", ch.statistical}, {"detail", ch.detail}});
  }
  m["checks"] = checks;
  json files = json::array();
  for (const auto& f : result.files) files.push_back(f.filename().string());
  m["files"] = files;
  m["summary"] = result.summary;
  m["exit_code"] = result.exit_code();
  std::ofstream o(prepare(out) / "manifest.json");
  o << m.dump(2) << '\n';
}

RunResult run_stability_scan(const ExperimentConfig& cfg, const fs::path& out) {
  cfg.validate();
  const Tower tower = cfg.tower();
  if (tower.depth() < 2) throw DepthError("stability scan needs depth >= 2");
  const TruncationPolicy trunc = cfg.truncation();
  RunResult res;
  res.experiment = "stability";
  const fs::path path = prepare(out) / "stability.csv";
  CsvWriter csv(path, csv_schema::stability);

  std::vector<int> ns = cfg.stability_n_sweep;
  if (ns.empty()) ns.push_back(cfg.bundle_N);
  std::vector<double> sigmas;
  json fits = json::array();
  for (int N : ns) {
    const BundleParams p = BundleParams::make(N, tower.d0());
    std::vector<double> taus, gaps, logs;
    for (int j = 0; j < tower.depth(); ++j) {
      const double g = stability_gap(tower, p, j, cfg.stability_grid, trunc);
      taus.push_back(tower.level(j).tau);
      gaps.push_back(g);
      logs.push_back(g > 0.0 ? std::log(g) : -std::numeric_limits<double>::infinity());
    }
    bool finite = true;
    for (double l : logs) finite = finite && std::isfinite(l);
    FitResult fit;
    if (finite) fit = linear_fit(taus, logs);
    const double sigma = finite ? -fit.slope : std::numeric_limits<double>::quiet_NaN();
    sigmas.push_back(sigma);
    for (int j = 0; j < tower.depth(); ++j) {
      const auto& lv = tower.level(j);
      csv.row({fi(j), fd(lv.tau), fi(lv.index), fi(N), fd(gaps[static_cast<std::size_t>(j)]), fd(sigma),
               fd(trunc.rtol)});
    }
    bool decreasing = true;
    for (std::size_t k = 1; k < gaps.size(); ++k) decreasing = decreasing && gaps[k] < gaps[k - 1];
    const std::string tag = "N=" + std::to_string(N);
    res.checks.push_back(check("gap strictly decreasing (" + tag + ")", decreasing, ""));
    res.checks.push_back(check("fitted sigma > 0 (" + tag + ")", finite && sigma > 0.0,
                               "sigma=" + fd(sigma) + " r2=" + fd(fit.r2)));
    fits.push_back({{"N", N}, {"sigma", sigma}, {"intercept", fit.intercept}, {"r2", fit.r2}, {"points", fit.points}});
  }
  bool monotone = true;
  for (std::size_t k = 1; k < sigmas.size(); ++k) {
    if (ns[k] > ns[k - 1]) monotone = monotone && sigmas[k] > sigmas[k - 1];
  }
  if (sigmas.size() > 1) res.checks.push_back(check("fitted sigma increasing in N", monotone, ""));
  res.summary["fits"] = fits;
  res.files.push_back(path);
  write_manifest(cfg, res, out);
  return res;
}

RunResult run_equidistribution(const ExperimentConfig& cfg, const fs::path& out, const DumpOptions& dump) {
  cfg.validate();
  if (cfg.sampling_n_samples < 100) throw DomainError("equidistribution needs n_samples >= 100");
  const Tower tower = cfg.tower();
  const BundleParams p = cfg.bundle();
  const TruncationPolicy trunc = cfg.truncation();
  const auto forms = preset_forms(cfg, tower, true);
  RunResult res;
  res.experiment = "equidist";
  const fs::path path = prepare(out) / "equidist.csv";
  CsvWriter csv(path, csv_schema::equidist);
  std::unique_ptr<CsvWriter> zcsv;
  std::unique_ptr<std::ofstream> jsonl;
  if (dump.zeros) {
    zcsv = std::make_unique<CsvWriter>(out / "zeros.csv", csv_schema::zeros);
    res.files.push_back(out / "zeros.csv");
  }
  if (dump.samples) {
    jsonl = std::make_unique<std::ofstream>(out / "samples.jsonl");
    res.files.push_back(out / "samples.jsonl");
  }

  const int top = std::min(tower.depth() - 1, 2);
  const double degree = static_cast<double>(p.N) * tower.d0();
  for (int j = 0; j <= top; ++j) {
    SamplingPlan plan;
    plan.n_samples = cfg.sampling_n_samples;
    plan.master_seed = cfg.sampling_master_seed;
    plan.stream = kEquidistStream + static_cast<std::uint32_t>(j);
    plan.bootstrap = 0;
    plan.keep_zeros = dump.zeros;
    plan.keep_samples = dump.samples;
    const EmpiricalRun run = empirical_stats(tower, p, j, forms, plan, trunc);
    res.summary["failures"][std::to_string(j)] = run.failures;
    for (std::size_t f = 0; f < forms.size(); ++f) {
      const auto& st = run.stats[f];
      const double theory = expected_pairing_theory(tower, p, j, forms[f], cfg.quadrature_grid, trunc);
      csv.row({fi(j), forms[f].id(), fd(theory), fd(st.mean), fd(st.stderr_mean), fi(st.samples),
               fi(static_cast<long long>(cfg.sampling_master_seed))});
      const std::string tag = "j=" + std::to_string(j) + " " + forms[f].id();
      if (forms[f].id() == "const") {
        bool exact = true;
        for (std::size_t i = 0; i < run.pairings.size(); ++i) {
          if (run.ok[i]) exact = exact && run.pairings[i][f] == degree;
        }
        res.checks.push_back(check("constant pairing equals degree on every sample (" + tag + ")",
                                   exact && st.var == 0.0, "var=" + fd(st.var)));
      } else {
        const double z = (st.mean - theory) / st.stderr_mean;
        res.checks.push_back(check("mean within 3 stderr (" + tag + ")", std::abs(z) <= 3.0,
                                   "emp=" + fd(st.mean) + " theory=" + fd(theory) + " z=" + fd(z), true));
      }
    }
    for (std::size_t i = 0; i < run.zero_sets.size(); ++i) {
      if (!run.ok[i]) continue;
      for (const auto& zr : run.zero_sets[i].zeros) {
        zcsv->row({fi(static_cast<long long>(cfg.sampling_master_seed)), fi(j), fd(zr.point.real()),
                   fd(zr.point.imag()), fi(zr.multiplicity)});
      }
    }
    for (std::size_t i = 0; i < run.coefs.size(); ++i) {
      if (!run.ok[i]) continue;
      json coef = json::array();
      for (Eigen::Index k = 0; k < run.coefs[i].size(); ++k) coef.push_back({run.coefs[i](k).real(), run.coefs[i](k).imag()});
      *jsonl << json{{"level", j}, {"seed", cfg.sampling_master_seed}, {"sample", i}, {"coef", coef}}.dump() << '\n';
    }
  }
  res.files.insert(res.files.begin(), path);
  write_manifest(cfg, res, out);
  return res;
}

RunResult run_variance_scan(const ExperimentConfig& cfg, const fs::path& out) {
  cfg.validate();
  const Tower tower = cfg.tower();
  if (tower.depth() < 3) throw DepthError("variance scan needs depth >= 3");
  const BundleParams p = cfg.bundle();
  const TruncationPolicy trunc = cfg.truncation();
  const auto forms = preset_forms(cfg, tower, false);
  RunResult res;
  res.experiment = "variance";
  const fs::path path = prepare(out) / "variance.csv";
  CsvWriter csv(path, csv_schema::variance);

  const int depth = tower.depth();
  const int sampled = std::min(depth, 2);
  std::vector<EmpiricalRun> runs;
  for (int j = 0; j < sampled; ++j) {
    SamplingPlan plan;
    plan.n_samples = cfg.sampling_n_samples;
    plan.master_seed = cfg.sampling_master_seed;
    plan.stream = kVarianceStream + static_cast<std::uint32_t>(j);
    plan.bootstrap = cfg.sampling_bootstrap;
    runs.push_back(empirical_stats(tower, p, j, forms, plan, trunc));
  }

  json per_form = json::object();
  for (std::size_t f = 0; f < forms.size(); ++f) {
    const TestForm& psi = forms[f];
    std::vector<VarianceTheory> th;
    for (int j = 0; j < depth; ++j) {
      th.push_back(variance_theory(tower, p, j, psi, cfg.variance_grid, trunc, cfg.quadrature_budget));
    }
    const double l1 = psi.ddbar_l1();
    // Fit log V_j = log C' - c tau_{floor(j/2)}.
    std::vector<double> x, y;
    for (int j = 0; j < depth; ++j) {
      if (th[static_cast<std::size_t>(j)].value > 0.0) {
        x.push_back(tower.level(j / 2).tau);
        y.push_back(std::log(th[static_cast<std::size_t>(j)].value));
      }
    }
    double c_hat = std::numeric_limits<double>::quiet_NaN(), scale = 0.0;
    FitResult fit;
    const bool fitted = !psi.harmonic() && x.size() >= 2;
    if (fitted) {
      fit = linear_fit(x, y);
      c_hat = -fit.slope;
    }
    const bool c_ok = fitted && c_hat > 0.0;
    std::vector<double> bound(static_cast<std::size_t>(depth), 0.0);
    if (c_ok) {
      for (int j = 0; j < depth; ++j) bound[static_cast<std::size_t>(j)] = variance_paper_bound(tower, j, psi, c_hat);
      scale = th[0].value / bound[0];
    }
    const std::string id = psi.id();
    bool decreasing = true, dominated = true;
    for (int j = 0; j < depth; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (j > 0) decreasing = decreasing && th[ju].value < th[ju - 1].value;
      // Relative slack of 1e-12 absorbs rounding at the fitting level.
      if (c_ok) dominated = dominated && th[ju].value <= scale * bound[ju] * (1.0 + 1e-12);
      const bool has_emp = j < sampled;
      const PairingStats* st = has_emp ? &runs[ju].stats[f] : nullptr;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      csv.row({fi(j), fd(tower.level(j).tau), fi(p.N), id, fd(th[ju].value), fd(has_emp ? st->var : nan),
               fd(has_emp ? st->var_stderr : nan), fd(c_ok ? scale * bound[ju] : nan), fi(has_emp ? st->samples : 0),
               fi(static_cast<long long>(cfg.sampling_master_seed))});
      if (has_emp && !psi.harmonic()) {
        const double tol = 3.0 * (st->var_stderr + th[ju].quad_error);
        res.checks.push_back(check("empirical variance within 3x combined error (j=" + std::to_string(j) + " " + id + ")",
                                   std::abs(st->var - th[ju].value) <= tol,
                                   "emp=" + fd(st->var) + " theory=" + fd(th[ju].value) + " tol=" + fd(tol), true));
      }
    }
    if (psi.harmonic()) {
      bool zero = true;
      for (const auto& t : th) zero = zero && t.value == 0.0;
      res.checks.push_back(check("harmonic form has zero variance (" + id + ")", zero, ""));
    } else {
      res.checks.push_back(check("theory variance decreasing in j (" + id + ")", decreasing, ""));
      res.checks.push_back(check("fitted c > 0 (" + id + ")", c_ok, "c=" + fd(c_hat) + " r2=" + fd(fit.r2)));
      res.checks.push_back(check("scaled bound dominates theory variance (" + id + ")", c_ok && dominated,
                                 "C=" + fd(scale)));
    }
    per_form[id] = {{"c_hat", c_hat}, {"C", scale}, {"r2", fit.r2}, {"ddbar_l1", l1}};
  }
  res.summary["forms"] = per_form;
  res.files.push_back(path);
  write_manifest(cfg, res, out);
  return res;
}

RunResult run_as_convergence(const ExperimentConfig& cfg, const fs::path& out) {
  cfg.validate();
  const Tower tower = cfg.tower();
  const BundleParams p = cfg.bundle();
  const TruncationPolicy trunc = cfg.truncation();
  const auto forms = preset_forms(cfg, tower, false);
  RunResult res;
  res.experiment = "asconv";
  prepare(out);

  // Summability gate: sum_j exp(-tau_j) with successive ratios bounded by exp(-tau_0).
  const fs::path gate_path = out / "gate.csv";
  {
    CsvWriter gate(gate_path, csv_schema::gate);
    const double tau0 = tower.level(0).tau;
    double partial = 0.0, max_ratio = 0.0;
    for (int j = 0; j < tower.depth(); ++j) {
      const double term = std::exp(-tower.level(j).tau);
      partial += term;
      double ratio = std::numeric_limits<double>::quiet_NaN();
      if (j > 0) {
        ratio = std::exp(-(tower.level(j).tau - tower.level(j - 1).tau));
        max_ratio = std::max(max_ratio, ratio);
      }
      gate.row({fi(j), fd(tower.level(j).tau), fd(term), fd(partial), fd(ratio)});
    }
    if (tower.depth() > 1) {
      res.checks.push_back(check("summability ratio <= exp(-tau_0) < 1", max_ratio <= std::exp(-tau0) * (1.0 + 1e-12),
                                 "max_ratio=" + fd(max_ratio) + " bound=" + fd(std::exp(-tau0))));
    }
    res.summary["gate_partial_sum"] = partial;
    res.summary["gate_max_ratio"] = max_ratio;
  }
  res.files.push_back(gate_path);
  if (tower.depth() < 2) {
    write_manifest(cfg, res, out);
    return res;
  }

  const fs::path path = out / "asconv.csv";
  CsvWriter csv(path, csv_schema::asconv);
  std::vector<std::vector<double>> errors(forms.size());
  for (int j = 0; j < tower.depth(); ++j) {
    const auto frame = build_frame(tower, p, j, trunc);
    StreamRng rng(cfg.sampling_master_seed, kAsConvStream, static_cast<std::uint64_t>(j));
    const Section s = sample_sphere(frame, rng);
    const ZeroSet zs = locate_zeros(s);
    for (std::size_t f = 0; f < forms.size(); ++f) {
      const double pairing = pair_current(zs, tower, forms[f]);
      const double limit = forms[f].limit_pairing(p.N);
      errors[f].push_back(std::abs(pairing - limit));
      csv.row({fi(j), fd(tower.level(j).tau), forms[f].id(), fd(pairing), fd(limit), fd(errors[f].back()),
               fi(static_cast<long long>(cfg.sampling_master_seed))});
    }
  }
  for (std::size_t f = 0; f < forms.size(); ++f) {
    res.checks.push_back(check("final pairing error <= initial (" + forms[f].id() + ")",
                               errors[f].back() <= errors[f].front(),
                               "initial=" + fd(errors[f].front()) + " final=" + fd(errors[f].back()), true));
  }
  res.files.push_back(path);
  write_manifest(cfg, res, out);
  return res;
}

RunResult run_gtilde_table(const ExperimentConfig& cfg, const fs::path& out) {
  RunResult res;
  res.experiment = "gtilde";
  const fs::path path = prepare(out) / "gtilde.csv";
  CsvWriter csv(path, csv_schema::gtilde);
  double max_diff = 0.0;
  bool bounded = true, monotone = true;
  double prev = -1.0;
  constexpr int kPoints = 1001;
  for (int i = 0; i < kPoints; ++i) {
    const double t = static_cast<double>(i) / (kPoints - 1);
    const double s = gtilde(t), q = gtilde_integral(t), b = t * t / 24.0;
    max_diff = std::max(max_diff, std::abs(s - q));
    bounded = bounded && s <= b;
    monotone = monotone && s >= prev;
    prev = s;
    csv.row({fd(t), fd(s), fd(q), fd(b)});
  }
  const double at_one = std::abs(gtilde(1.0) - 1.0 / 24.0);
  res.checks.push_back(check("series and integral agree within 1e-10", max_diff <= 1e-10, "max=" + fd(max_diff)));
  res.checks.push_back(check("Gtilde(t) <= t^2/24", bounded, ""));
  res.checks.push_back(check("Gtilde monotone", monotone, ""));
  res.checks.push_back(check("Gtilde(1) = 1/24 within 1e-10", at_one <= 1e-10, "diff=" + fd(at_one)));
  res.summary["max_diff"] = max_diff;
  res.files.push_back(path);
  write_manifest(cfg, res, out);
  return res;
}

RunResult run_kernel_table(const ExperimentConfig& cfg, const fs::path& out) {
  cfg.validate();
  const Tower tower = cfg.tower();
  const BundleParams p = cfg.bundle();
  const TruncationPolicy trunc = cfg.truncation();
  RunResult res;
  res.experiment = "kernel-table";
  const fs::path path = prepare(out) / "kernel.csv";
  CsvWriter csv(path, csv_schema::kernel);
  for (int j = 0; j < tower.depth(); ++j) {
    const auto& lv = tower.level(j);
    const QuotientKernel k(tower, p, j, trunc);
    const double trace = kernel_trace(tower, p, j, cfg.quadrature_grid, trunc);
    const double dim = static_cast<double>(p.N) * tower.d0() * static_cast<double>(lv.index);
    const DiagonalMin blm = base_locus_min(tower, p, j, 64, trunc);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    const CellGrid cell = CellGrid::of(tower.base(), 32, 32);
    for (std::size_t a = 0; a < cell.size(); ++a) {
      const double v = k.metric_density(cell.node(a)).value;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double gap = stability_gap(tower, p, j, cfg.stability_grid, trunc);
    csv.row({fi(j), fd(lv.tau), fi(lv.index), fi(p.N), fd(trace), fd(dim), fd(blm.value), fd(lo), fd(hi), fd(gap)});
    const std::string tag = " (j=" + std::to_string(j) + ")";
    res.checks.push_back(check("trace equals dimension within 1e-8" + tag, std::abs(trace - dim) <= 1e-8 * dim,
                               "trace=" + fd(trace)));
    res.checks.push_back(check("base locus minimum > 0" + tag, blm.value > 0.0, "min=" + fd(blm.value)));
    res.checks.push_back(check("metric density >= 0" + tag, lo >= 0.0, "min=" + fd(lo)));
  }
  res.files.push_back(path);
  write_manifest(cfg, res, out);
  return res;
}

}  // namespace covertower
