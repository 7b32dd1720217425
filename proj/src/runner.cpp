// Copyright 2026 The polpur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "polpur/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "polpur/reference.hpp"

namespace polpur {

namespace {

using Columns = std::vector<std::pair<std::string, std::string>>;

std::string fmt(double x) { return format_double(x); }
std::string fmt(bool b) { return b ? "true" : "false"; }
std::string fmt(std::size_t n) { return std::to_string(n); }

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

struct Checker {
  PointResult& r;
  double tol;
  double worst = 0.0;

  void close(const std::string& what, double sim, double ref) {
    double d = std::abs(sim - ref);
    worst = std::max(worst, d);
    if (!(d <= tol)) {
      r.failures.push_back(what + ": simulated " + fmt(sim) + " vs reference " + fmt(ref) +
                           " (|diff| " + fmt(d) + " > " + fmt(tol) + ")");
    }
  }
  void expect(const std::string& what, bool ok) {
    if (!ok) r.failures.push_back(what);
  }
};

bool uniform_detectors(const ExperimentConfig& c) {
  for (const auto& name : kDetectorNames) {
    if (!(c.detector_model(name) == c.detector)) return false;
  }
  return true;
}

bool heralds_first(const ExperimentConfig& c) {
  return c.coincidences.front() == Coincidence{Pol::H, Pol::H};
}

Columns source_columns(const ExperimentConfig& c, bool pdc) {
  Columns col{{"alpha_sq", fmt(c.alpha_sq)}, {"phase", fmt(c.phase)}};
  if (pdc) {
    col.emplace_back("gamma", fmt(c.gamma));
    col.emplace_back("pump_phase", fmt(c.pump_phase));
    col.emplace_back("phase_averaged", fmt(c.phase_averaged));
  }
  col.emplace_back("detector", to_string(c.detector.kind));
  col.emplace_back("eta", fmt(c.detector.efficiency));
  col.emplace_back("nu", fmt(c.detector.dark_mean));
  col.emplace_back("veto", fmt(c.veto));
  col.emplace_back("postselect", fmt(c.postselect));
  col.emplace_back("nmax", std::to_string(c.n_max));
  return col;
}

void run_columns(Columns& col, const RunStatistics& st) {
  col.emplace_back("p", fmt(st.p));
  col.emplace_back("p_total", fmt(st.p_total));
  col.emplace_back("p_s", fmt(st.p_s));
  col.emplace_back("p_e", fmt(st.p_e));
  col.emplace_back("p_e0", fmt(st.p_e0));
  col.emplace_back("p_e1", fmt(st.p_e1));
  col.emplace_back("p_e_rest", fmt(st.p_e_rest));
  col.emplace_back("fidelity", fmt(st.fidelity));
  col.emplace_back("dropped_weight", fmt(st.dropped_weight));
}

void pair_point(const ExperimentConfig& c, bool verify, PointResult& r) {
  const RunStatistics st = run(to_run_config(c));
  r.columns = source_columns(c, false);
  run_columns(r.columns, st);
  r.result = st.to_json();
  r.headline = {{"alpha_sq", fmt(c.alpha_sq)}, {"eta", fmt(c.detector.efficiency)},
                {"P_total", fmt(st.p_total)},  {"P_s", fmt(st.p_s)},
                {"P_e", fmt(st.p_e)},          {"fidelity", fmt(st.fidelity)}};
  if (!verify) return;
  r.verify_applicable = uniform_detectors(c) && c.detector.dark_mean == 0.0 && !c.postselect &&
                        heralds_first(c);
  Columns ref{{"ref_p", ""}, {"ref_p_s", ""}, {"ref_p_e", ""}, {"ref_fidelity", ""}, {"max_abs_diff", ""}};
  if (r.verify_applicable) {
    const auto x = c.detector.kind == DetectorKind::Conventional
                       ? reference::ideal_conventional(c.detector.efficiency, c.alpha_sq)
                       : reference::ideal_single(c.detector.efficiency, c.alpha_sq);
    Checker chk{r, c.tolerance};
    chk.close("p", st.p, x.p);
    chk.close("p_s", st.p_s, x.p_s);
    chk.close("p_e", st.p_e, x.p_e);
    if (st.p > kZeroProbability) chk.close("fidelity", st.fidelity, x.weight_phi);
    ref = {{"ref_p", fmt(x.p)}, {"ref_p_s", fmt(x.p_s)}, {"ref_p_e", fmt(x.p_e)},
           {"ref_fidelity", fmt(x.weight_phi)}, {"max_abs_diff", fmt(chk.worst)}};
    r.result["reference"] = reference::to_json(x);
  }
  r.columns.insert(r.columns.end(), ref.begin(), ref.end());
}

void pdc_point(const ExperimentConfig& c, bool verify, PointResult& r) {
  const RunConfig rc = to_run_config(c);
  const RunStatistics st = run(rc);
  r.columns = source_columns(c, true);
  run_columns(r.columns, st);
  // C recovered from the simulated P.
  const auto& spec = std::get<PdcSource>(rc.source).spec;
  const double eta = c.detector.efficiency;
  const double pre = eta * eta * spec.g() * spec.g() * c.gamma * c.gamma * (1.0 - c.alpha_sq);
  const double scale = c.detector.kind == DetectorKind::Conventional ? 16.0 : 4.0;
  const double sim_c = pre > 0.0 ? st.p * scale / pre : 0.0;
  r.columns.emplace_back("c", fmt(sim_c));
  r.result = st.to_json();
  r.result["c"] = sim_c;
  r.headline = {{"alpha_sq", fmt(c.alpha_sq)}, {"gamma", fmt(c.gamma)},
                {"eta", fmt(eta)},             {"P_total", fmt(st.p_total)},
                {"P_s", fmt(st.p_s)},          {"P_e", fmt(st.p_e)},
                {"fidelity", fmt(st.fidelity)}};
  if (!verify) return;
  r.verify_applicable = uniform_detectors(c) && c.detector.dark_mean == 0.0 && !c.postselect &&
                        heralds_first(c) && c.n_max == 4;
  Columns ref{{"ref_c", ""},    {"ref_p", ""},        {"ref_p_s", ""}, {"ref_p_e0", ""},
              {"ref_p_e1", ""}, {"ref_fidelity", ""}, {"max_abs_diff", ""}};
  if (r.verify_applicable) {
    const auto x = c.detector.kind == DetectorKind::Conventional
                       ? reference::pdc_conventional(eta, c.gamma, c.alpha_sq)
                       : reference::pdc_single_photon(eta, c.gamma, c.alpha_sq);
    Checker chk{r, c.tolerance};
    const double ref_e0 = c.veto ? x.p_e0 : x.p_e0_no_veto;
    const double ref_p = c.veto ? x.p : x.p_s + x.p_e0_no_veto + x.p_e1;
    if (c.veto && pre > 0.0) chk.close("c", sim_c, x.c);
    chk.close("p", st.p, ref_p);
    chk.close("p_s", st.p_s, x.p_s);
    chk.close("p_e0", st.p_e0, ref_e0);
    chk.close("p_e1", st.p_e1, x.p_e1);
    const double ref_fid = ref_p > 0.0 ? x.p_s / ref_p : 0.0;
    if (st.p > kZeroProbability) chk.close("fidelity", st.fidelity, ref_fid);
    ref = {{"ref_c", fmt(x.c)},       {"ref_p", fmt(ref_p)},          {"ref_p_s", fmt(x.p_s)},
           {"ref_p_e0", fmt(ref_e0)}, {"ref_p_e1", fmt(x.p_e1)},      {"ref_fidelity", fmt(ref_fid)},
           {"max_abs_diff", fmt(chk.worst)}};
    r.result["reference"] = reference::to_json(x);
  }
  r.columns.insert(r.columns.end(), ref.begin(), ref.end());
}

void channel_point(const ExperimentConfig& c, bool verify, std::mt19937_64& rng, PointResult& r) {
  FluctuationProcess process = to_process(c);
  std::optional<Compensation> comp;
  if (c.compensate) {
    const Complex f = c.channel_process == "constant_f" ? c.f_a.value() * c.f_b.value()
                                                        : *f_factors(process.sample(rng)).f;
    comp = compensate(f);
    process = compensated(process, *comp);
  }
  const PurifiabilityReport rep = purifiability(process, rng, {.samples = c.samples});
  r.columns = {{"process", c.channel_process},
               {"compensate", fmt(c.compensate)},
               {"samples", fmt(rep.samples)},
               {"condition", fmt(rep.condition)},
               {"condition_stderr", fmt(rep.condition_stderr)},
               {"mean_weight", fmt(rep.mean_weight)},
               {"purifiable", fmt(rep.purifiable)},
               {"post_fidelity", fmt(rep.post_fidelity)}};
  r.result = rep.to_json();
  if (comp) {
    r.result["compensation"] = {{"mode", comp->mode.label()},
                                {"factor", {comp->factor.real(), comp->factor.imag()}}};
  }
  r.headline = {{"process", c.channel_process}, {"condition", fmt(rep.condition)},
                {"purifiable", fmt(rep.purifiable)}, {"post_fidelity", fmt(rep.post_fidelity)}};
  if (!verify) return;
  r.verify_applicable = true;
  Checker chk{r, c.tolerance};
  const std::size_t n = std::min<std::size_t>(c.samples, 100);
  double worst_f = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ChannelSample s = process.sample(rng);
    chk.close("four-photon weight", transmit(s).four_photon_weight, four_photon_weight(s));
    FFactors f = f_factors(s);
    if (f.f && f.f_a && f.f_b) worst_f = std::max(worst_f, std::abs(*f.f - *f.f_a * *f.f_b));
  }
  chk.close("F - F_A F_B", worst_f, 0.0);
  chk.expect("purifiable flag disagrees with post-selected fidelity",
             rep.purifiable == (std::abs(rep.post_fidelity - 1.0) <= 1e-9));
  r.columns.emplace_back("max_abs_diff", fmt(chk.worst));
}

void fiber_point(const ExperimentConfig& c, bool verify, std::mt19937_64& rng, PointResult& r) {
  FiberOptions o;
  o.fiber_case = c.fiber_case;
  o.tau_plus = c.tau_plus;
  o.tau_minus = c.tau_minus;
  o.dt = c.dt;
  o.samples = c.samples;
  o.strategy = c.strategy;
  o.model = c.phase_model;
  o.phase_sigma = c.phase_sigma;
  const FiberReport rep = fiber_scenario(o, rng);
  r.columns = {{"case", to_string(rep.fiber_case)},
               {"model", to_string(c.phase_model)},
               {"tau_plus", fmt(c.tau_plus)},
               {"tau_minus", fmt(c.tau_minus)},
               {"dt", fmt(c.dt)},
               {"samples", fmt(rep.samples)},
               {"strategy", to_string(rep.strategy)},
               {"purification_used", fmt(rep.purification_used)},
               {"direct_fidelity", fmt(rep.direct_fidelity)},
               {"purified_fidelity", fmt(rep.purified_fidelity)},
               {"fidelity", fmt(rep.fidelity)},
               {"purifiable", fmt(rep.success)}};
  r.result = rep.to_json();
  r.headline = {{"case", to_string(rep.fiber_case)}, {"strategy", to_string(rep.strategy)},
                {"fidelity", fmt(rep.fidelity)}, {"purifiable", fmt(rep.success)}};
  if (!verify) return;
  r.verify_applicable = c.phase_model == PhaseModel::Idealized && c.strategy == SwapStrategy::Auto;
  if (r.verify_applicable) {
    const bool expected = rep.fiber_case != FiberCase::D;
    Checker chk{r, c.tolerance};
    chk.expect("fiber case " + to_string(rep.fiber_case) + (expected ? " should" : " should not") +
                   " purify",
               rep.success == expected);
  }
}

void dark_point(const ExperimentConfig& c, bool verify, PointResult& r) {
  DarkBudgetOptions o;
  o.kind = c.detector.kind;
  o.efficiency = c.detector.efficiency;
  o.alpha_sq = c.alpha_sq;
  o.n_max = c.n_max;
  o.margin = c.dark_margin;
  const DarkCountBudget b = dark_count_budget(c.dark_gamma_sq, c.dark_nu, o);
  const DarkOrderFit fit = fit_dark_count_orders(c.dark_gamma_sq, c.dark_nu, o, c.fit_points);
  r.columns = {{"gamma_sq", fmt(c.dark_gamma_sq)}, {"nu", fmt(c.dark_nu)},
               {"detector", to_string(c.detector.kind)}, {"eta", fmt(c.detector.efficiency)}};
  for (std::size_t i = 0; i < 5; ++i) r.columns.emplace_back("p" + std::to_string(i), fmt(b.contributions[i]));
  for (std::size_t i = 0; i < 5; ++i) r.columns.emplace_back("gamma_exp" + std::to_string(i), fmt(fit.gamma_exponent[i]));
  for (std::size_t i = 0; i < 5; ++i) r.columns.emplace_back("nu_exp" + std::to_string(i), fmt(fit.nu_exponent[i]));
  r.columns.emplace_back("worst_ratio", fmt(b.worst_ratio));
  r.columns.emplace_back("negligible", fmt(b.negligible));
  r.result = b.to_json();
  r.result["gamma_exponents"] = fit.gamma_exponent;
  r.result["nu_exponents"] = fit.nu_exponent;
  r.headline = {{"gamma_sq", fmt(c.dark_gamma_sq)}, {"nu", fmt(c.dark_nu)},
                {"worst_ratio", fmt(b.worst_ratio)}, {"negligible", fmt(b.negligible)}};
  if (!verify) return;
  r.verify_applicable = true;
  constexpr std::array<double, 5> kGamma{4, 4, 2, 2, 0};
  constexpr std::array<double, 5> kNu{0, 1, 2, 3, 4};
  Checker chk{r, 0.05};
  for (std::size_t i = 0; i < 5; ++i) {
    chk.close("gamma exponent of P" + std::to_string(i), fit.gamma_exponent[i], kGamma[i]);
    chk.close("nu exponent of P" + std::to_string(i), fit.nu_exponent[i], kNu[i]);
  }
}

}  // namespace

PointResult execute_point(const ExperimentConfig& config, bool verify, std::uint64_t index) {
  if (config.kind == ExperimentKind::Sweep) throw std::invalid_argument("execute_point: got a sweep");
  PointResult r;
  r.kind = config.kind;
  r.verify_requested = verify;
  std::mt19937_64 rng = stream(config.seed, index);
  switch (config.kind) {
    case ExperimentKind::Pair: pair_point(config, verify, r); break;
    case ExperimentKind::Pdc: pdc_point(config, verify, r); break;
    case ExperimentKind::Channel: channel_point(config, verify, rng, r); break;
    case ExperimentKind::Fiber: fiber_point(config, verify, rng, r); break;
    case ExperimentKind::DarkBudget: dark_point(config, verify, r); break;
    case ExperimentKind::Sweep: break;
  }
  if (verify) {
    r.columns.emplace_back("verified", r.verify_applicable ? fmt(r.verified()) : "n/a");
    r.result["verification"] = {{"applicable", r.verify_applicable},
                                {"passed", r.verified()},
                                {"failures", r.failures}};
  }
  return r;
}

SweepResult execute_sweep(const ExperimentConfig& config, bool verify, unsigned threads) {
  SweepResult s;
  s.axes = config.axes;
  s.configs = expand_sweep(config);
  s.points.resize(s.configs.size());
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, s.configs.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < s.configs.size();) {
      try {
        s.points[i] = execute_point(s.configs[i], verify, i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();  // joins
  if (error) std::rethrow_exception(error);
  return s;
}

std::string to_csv(const std::vector<PointResult>& points, const std::vector<Columns>& leading) {
  std::ostringstream out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    Columns row;
    if (i < leading.size()) row = leading[i];
    row.insert(row.end(), points[i].columns.begin(), points[i].columns.end());
    if (i == 0) {
      for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k].first;
      out << "\n";
    }
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k].second;
    out << "\n";
  }
  return out.str();
}

std::string to_csv(const SweepResult& sweep) {
  std::vector<Columns> leading;
  for (std::size_t i = 0; i < sweep.configs.size(); ++i) {
    Columns row{{"index", std::to_string(i)}};
    std::vector<std::string> values(sweep.axes.size());
    std::size_t rem = i;
    for (std::size_t a = sweep.axes.size(); a-- > 0;) {
      const auto& v = sweep.axes[a].values;
      values[a] = format_double(v[rem % v.size()]);
      rem /= v.size();
    }
    for (std::size_t a = 0; a < sweep.axes.size(); ++a) row.emplace_back(sweep.axes[a].key, values[a]);
    leading.push_back(std::move(row));
  }
  return to_csv(sweep.points, leading);
}

namespace {

nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  std::istringstream in(render(c));
  for (std::string line; std::getline(in, line);) {
    auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 3);
    if (key == "sweep.values") {
      j["sweep.values"].push_back(value);
    } else {
      j[key] = value;
    }
  }
  return j;
}

}  // namespace

nlohmann::ordered_json to_json(const ExperimentConfig& config, const PointResult& point) {
  nlohmann::ordered_json j;
  j["experiment"] = to_string(config.kind);
  j["config"] = config_json(config);
  j["result"] = point.result;
  return j;
}

nlohmann::ordered_json to_json(const ExperimentConfig& config, const SweepResult& sweep) {
  nlohmann::ordered_json j;
  j["experiment"] = "sweep";
  j["config"] = config_json(config);
  auto& pts = j["points"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    nlohmann::ordered_json p;
    p["index"] = i;
    for (const auto& [k, v] : sweep.points[i].columns) p["columns"][k] = v;
    p["result"] = sweep.points[i].result;
    pts.push_back(std::move(p));
  }
  return j;
}

std::string headline_table(const std::vector<PointResult>& points) {
  if (points.empty()) return "";
  const auto& head = points.front().headline;
  std::vector<std::size_t> width(head.size());
  for (std::size_t k = 0; k < head.size(); ++k) width[k] = head[k].first.size();
  std::vector<std::vector<std::string>> cells;
  for (const auto& p : points) {
    std::vector<std::string> row;
    for (std::size_t k = 0; k < head.size() && k < p.headline.size(); ++k) {
      std::string v = p.headline[k].second;
      // Console view: shorter numbers.
      try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used == v.size()) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.6g", x);
          v = buf;
        }
      } catch (const std::exception&) {
      }
      width[k] = std::max(width[k], v.size());
      row.push_back(std::move(v));
    }
    cells.push_back(std::move(row));
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      out << (k ? "  " : "") << row[k] << std::string(width[k] - row[k].size(), ' ');
    }
    out << "\n";
  };
  std::vector<std::string> names;
  for (const auto& [n, _] : head) names.push_back(n);
  line(names);
  for (const auto& row : cells) line(row);
  return out.str();
}

}  // namespace polpur
