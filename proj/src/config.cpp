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

#include "polpur/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

namespace polpur {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("not a finite number");
  }
  return v;
}

template <class Int>
Int parse_integer(const std::string& s) {
  Int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("not an integer");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("expected true or false");
}

double in_range(double v, double lo, double hi, const char* what) {
  if (!(v >= lo && v <= hi)) {
    throw std::invalid_argument(std::string("must lie in ") + what);
  }
  return v;
}

double positive(double v) {
  if (!(v > 0.0)) throw std::invalid_argument("must be positive");
  return v;
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

using Getter = std::function<std::optional<std::string>(const ExperimentConfig&)>;
using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

struct KeySpec {
  std::string name;
  bool numeric = false;
  Setter set;
  Getter get;
};

KeySpec real_key(std::string name, double ExperimentConfig::*field, std::function<double(double)> check) {
  return {std::move(name), true,
          [field, check](ExperimentConfig& c, const std::string& v) { c.*field = check(parse_double(v)); },
          [field](const ExperimentConfig& c) { return std::optional(format_double(c.*field)); }};
}

double any(double v) { return v; }

std::size_t mu_index(int k, Pol p) { return static_cast<std::size_t>((k - 1) * 2 + (p == Pol::H ? 0 : 1)); }

std::vector<KeySpec> build_table() {
  using C = ExperimentConfig;
  std::vector<KeySpec> t;
  t.push_back({"experiment", false,
               [](C& c, const std::string& v) { c.kind = experiment_kind_from_string(v); },
               [](const C& c) { return std::optional(to_string(c.kind)); }});

  t.push_back(real_key("source.alpha_sq", &C::alpha_sq, [](double v) { return in_range(v, 0, 1, "[0, 1]"); }));
  t.push_back(real_key("source.phase", &C::phase, any));
  t.push_back(real_key("source.gamma", &C::gamma, [](double v) {
    if (!(v >= 0.0 && v < 1.0)) throw std::invalid_argument("must lie in [0, 1)");
    return v;
  }));
  t.push_back(real_key("source.pump_phase", &C::pump_phase, any));
  t.push_back({"source.phase_averaged", false,
               [](C& c, const std::string& v) { c.phase_averaged = parse_bool(v); },
               [](const C& c) { return std::optional(bool_str(c.phase_averaged)); }});

  t.push_back({"detector.kind", false,
               [](C& c, const std::string& v) { c.detector.kind = detector_kind_from_string(v); },
               [](const C& c) { return std::optional(to_string(c.detector.kind)); }});
  t.push_back({"detector.eta", true,
               [](C& c, const std::string& v) { c.detector.efficiency = in_range(parse_double(v), 0, 1, "[0, 1]"); },
               [](const C& c) { return std::optional(format_double(c.detector.efficiency)); }});
  t.push_back({"detector.nu", true,
               [](C& c, const std::string& v) { c.detector.dark_mean = in_range(parse_double(v), 0, INFINITY, "[0, inf)"); },
               [](const C& c) { return std::optional(format_double(c.detector.dark_mean)); }});
  for (const auto& name : kDetectorNames) {
    const std::string p = "detector." + name + ".";
    t.push_back({p + "kind", false,
                 [name](C& c, const std::string& v) { c.detector_overrides[name].kind = detector_kind_from_string(v); },
                 [name](const C& c) -> std::optional<std::string> {
                   auto it = c.detector_overrides.find(name);
                   if (it == c.detector_overrides.end() || !it->second.kind) return std::nullopt;
                   return to_string(*it->second.kind);
                 }});
    t.push_back({p + "eta", true,
                 [name](C& c, const std::string& v) {
                   c.detector_overrides[name].eta = in_range(parse_double(v), 0, 1, "[0, 1]");
                 },
                 [name](const C& c) -> std::optional<std::string> {
                   auto it = c.detector_overrides.find(name);
                   if (it == c.detector_overrides.end() || !it->second.eta) return std::nullopt;
                   return format_double(*it->second.eta);
                 }});
    t.push_back({p + "nu", true,
                 [name](C& c, const std::string& v) {
                   c.detector_overrides[name].nu = in_range(parse_double(v), 0, INFINITY, "[0, inf)");
                 },
                 [name](const C& c) -> std::optional<std::string> {
                   auto it = c.detector_overrides.find(name);
                   if (it == c.detector_overrides.end() || !it->second.nu) return std::nullopt;
                   return format_double(*it->second.nu);
                 }});
  }

  t.push_back({"protocol.veto", false, [](C& c, const std::string& v) { c.veto = parse_bool(v); },
               [](const C& c) { return std::optional(bool_str(c.veto)); }});
  t.push_back({"protocol.postselect", false, [](C& c, const std::string& v) { c.postselect = parse_bool(v); },
               [](const C& c) { return std::optional(bool_str(c.postselect)); }});
  t.push_back({"protocol.coincidences", false,
               [](C& c, const std::string& v) {
                 std::vector<Coincidence> list;
                 for (const auto& w : split_ws(v)) list.push_back(Coincidence::parse(w));
                 if (list.empty()) throw std::invalid_argument("needs at least one coincidence");
                 c.coincidences = list;
               },
               [](const C& c) {
                 std::string s;
                 for (const auto& x : c.coincidences) s += (s.empty() ? "" : " ") + x.label();
                 return std::optional(s);
               }});

  t.push_back({"nmax", true,
               [](C& c, const std::string& v) {
                 int n = parse_integer<int>(v);
                 if (n < 0 || n > kMaxPhotons) {
                   throw std::invalid_argument("must lie in [0, " + std::to_string(kMaxPhotons) + "]");
                 }
                 c.n_max = n;
               },
               [](const C& c) { return std::optional(std::to_string(c.n_max)); }});
  t.push_back({"seed", false, [](C& c, const std::string& v) { c.seed = parse_integer<std::uint64_t>(v); },
               [](const C& c) { return std::optional(std::to_string(c.seed)); }});
  t.push_back({"samples", true,
               [](C& c, const std::string& v) {
                 auto n = parse_integer<std::size_t>(v);
                 if (n == 0) throw std::invalid_argument("must be at least 1");
                 c.samples = n;
               },
               [](const C& c) { return std::optional(std::to_string(c.samples)); }});

  t.push_back({"channel.process", false,
               [](C& c, const std::string& v) {
                 static const std::set<std::string> ok{"constant", "uniform_phases", "constant_f", "independent"};
                 if (!ok.contains(v)) {
                   throw std::invalid_argument("expected constant, uniform_phases, constant_f or independent");
                 }
                 c.channel_process = v;
               },
               [](const C& c) { return std::optional(c.channel_process); }});
  auto polar_keys = [&](const std::string& base, std::function<Polar&(C&)> ref,
                        std::function<const Polar&(const C&)> cref, bool allow_zero) {
    t.push_back({base + ".abs", true,
                 [ref, allow_zero](C& c, const std::string& v) {
                   double a = parse_double(v);
                   if (allow_zero ? !(a >= 0.0 && a <= 1.0) : !(a > 0.0)) {
                     throw std::invalid_argument(allow_zero ? "must lie in [0, 1]" : "must be positive");
                   }
                   ref(c).abs = a;
                 },
                 [cref](const C& c) { return std::optional(format_double(cref(c).abs)); }});
    t.push_back({base + ".arg", true, [ref](C& c, const std::string& v) { ref(c).arg = parse_double(v); },
                 [cref](const C& c) { return std::optional(format_double(cref(c).arg)); }});
  };
  polar_keys("channel.f_a", [](C& c) -> Polar& { return c.f_a; },
             [](const C& c) -> const Polar& { return c.f_a; }, false);
  polar_keys("channel.f_b", [](C& c) -> Polar& { return c.f_b; },
             [](const C& c) -> const Polar& { return c.f_b; }, false);
  t.push_back(real_key("channel.min_mag", &C::min_mag, [](double v) { return in_range(v, 0, 1, "[0, 1]"); }));
  t.push_back({"channel.compensate", false, [](C& c, const std::string& v) { c.compensate = parse_bool(v); },
               [](const C& c) { return std::optional(bool_str(c.compensate)); }});
  for (int k = 1; k <= 4; ++k) {
    for (Pol p : {Pol::H, Pol::V}) {
      const std::size_t i = mu_index(k, p);
      polar_keys("channel.mu." + ModeId{k, p}.label(), [i](C& c) -> Polar& { return c.mu[i]; },
                 [i](const C& c) -> const Polar& { return c.mu[i]; }, true);
    }
  }

  t.push_back({"fiber.case", false, [](C& c, const std::string& v) { c.fiber_case = fiber_case_from_string(v); },
               [](const C& c) { return std::optional(to_string(c.fiber_case)); }});
  t.push_back(real_key("fiber.tau_plus", &C::tau_plus, positive));
  t.push_back(real_key("fiber.tau_minus", &C::tau_minus, positive));
  t.push_back(real_key("fiber.dt", &C::dt, positive));
  t.push_back({"fiber.strategy", false,
               [](C& c, const std::string& v) { c.strategy = swap_strategy_from_string(v); },
               [](const C& c) { return std::optional(to_string(c.strategy)); }});
  t.push_back({"fiber.model", false,
               [](C& c, const std::string& v) { c.phase_model = phase_model_from_string(v); },
               [](const C& c) { return std::optional(to_string(c.phase_model)); }});
  t.push_back(real_key("fiber.phase_sigma", &C::phase_sigma, positive));

  t.push_back(real_key("dark.gamma_sq", &C::dark_gamma_sq, [](double v) {
    if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("must lie in (0, 1)");
    return v;
  }));
  t.push_back(real_key("dark.nu", &C::dark_nu, positive));
  t.push_back(real_key("dark.margin", &C::dark_margin, positive));
  t.push_back({"dark.fit_points", true,
               [](C& c, const std::string& v) {
                 int n = parse_integer<int>(v);
                 if (n < 2) throw std::invalid_argument("must be at least 2");
                 c.fit_points = n;
               },
               [](const C& c) { return std::optional(std::to_string(c.fit_points)); }});

  t.push_back(real_key("verify.tolerance", &C::tolerance, positive));

  t.push_back({"sweep.base", false,
               [](C& c, const std::string& v) { c.sweep_base = experiment_kind_from_string(v); },
               [](const C& c) { return std::optional(to_string(c.sweep_base)); }});
  return t;
}

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = build_table();
  return table;
}

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : key_table()) {
    if (k.name == key) return &k;
  }
  return nullptr;
}

bool is_numeric_key(const std::string& key) {
  const KeySpec* k = find_key(key);
  return k != nullptr && k->numeric;
}

SweepAxis parse_axis_range(const std::string& v) {
  auto w = split_ws(v);
  if (w.size() != 4) throw std::invalid_argument("expected '<key> <first> <last> <points>'");
  if (!is_numeric_key(w[0])) throw std::invalid_argument("'" + w[0] + "' is not a numeric key");
  const double lo = parse_double(w[1]);
  const double hi = parse_double(w[2]);
  const int n = parse_integer<int>(w[3]);
  if (n < 1) throw std::invalid_argument("points must be at least 1");
  SweepAxis a{w[0], {}};
  for (int i = 0; i < n; ++i) a.values.push_back(i == 0 ? lo : i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1));
  return a;
}

SweepAxis parse_axis_values(const std::string& v) {
  auto w = split_ws(v);
  if (w.size() < 2) throw std::invalid_argument("expected '<key> <value> ...'");
  if (!is_numeric_key(w[0])) throw std::invalid_argument("'" + w[0] + "' is not a numeric key");
  SweepAxis a{w[0], {}};
  for (std::size_t i = 1; i < w.size(); ++i) a.values.push_back(parse_double(w[i]));
  return a;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Pair: return "pair";
    case ExperimentKind::Pdc: return "pdc";
    case ExperimentKind::Channel: return "channel";
    case ExperimentKind::Fiber: return "fiber";
    case ExperimentKind::DarkBudget: return "dark_budget";
    case ExperimentKind::Sweep: return "sweep";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::Pair, ExperimentKind::Pdc, ExperimentKind::Channel, ExperimentKind::Fiber,
                 ExperimentKind::DarkBudget, ExperimentKind::Sweep}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string m = "invalid configuration:";
        for (const auto& v : violations) m += "\n  " + v;
        return m;
      }()),
      violations_(std::move(violations)) {}

DetectorModel ExperimentConfig::detector_model(const std::string& name) const {
  DetectorModel m = detector;
  auto it = detector_overrides.find(name);
  if (it != detector_overrides.end()) {
    if (it->second.kind) m.kind = *it->second.kind;
    if (it->second.eta) m.efficiency = *it->second.eta;
    if (it->second.nu) m.dark_mean = *it->second.nu;
  }
  return m;
}

void set_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const KeySpec* k = find_key(key);
  if (k == nullptr) throw std::invalid_argument("unknown key");
  k->set(c, value);
}

std::vector<std::string> numeric_keys() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) {
    if (k.numeric) out.push_back(k.name);
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::vector<std::string> errors;
  std::set<std::string> seen;
  std::istringstream in(text);
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "sweep.axis") {
        c.axes.push_back(parse_axis_range(value));
        continue;
      }
      if (key == "sweep.values") {
        c.axes.push_back(parse_axis_values(value));
        continue;
      }
      const KeySpec* k = find_key(key);
      if (k == nullptr) {
        errors.push_back(where + "unknown key '" + key + "'");
        continue;
      }
      if (!seen.insert(key).second) {
        errors.push_back(where + "duplicate key '" + key + "'");
        continue;
      }
      k->set(c, value);
    } catch (const std::exception& e) {
      errors.push_back(where + key + " = " + value + ": " + e.what());
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  std::vector<std::string> errors;
  if (c.kind == ExperimentKind::Sweep) {
    if (c.axes.empty()) errors.push_back("sweep: at least one sweep.axis or sweep.values is required");
    if (c.sweep_base == ExperimentKind::Sweep) errors.push_back("sweep.base: cannot itself be sweep");
  } else if (!c.axes.empty()) {
    errors.push_back("sweep axes given but experiment is " + to_string(c.kind));
  }
  std::set<std::string> axis_keys;
  for (const auto& a : c.axes) {
    if (!axis_keys.insert(a.key).second) errors.push_back("sweep: key '" + a.key + "' swept twice");
    if (!is_numeric_key(a.key)) errors.push_back("sweep: '" + a.key + "' is not a numeric key");
  }
  std::set<Coincidence> uniq(c.coincidences.begin(), c.coincidences.end());
  if (uniq.size() != c.coincidences.size()) errors.push_back("protocol.coincidences: duplicate entry");
  if (c.compensate && c.channel_process != "constant" && c.channel_process != "constant_f") {
    errors.push_back("channel.compensate: needs a constant or constant_f process (F must be constant)");
  }
  const ExperimentKind effective = c.kind == ExperimentKind::Sweep ? c.sweep_base : c.kind;
  if (effective == ExperimentKind::Pdc && c.n_max < 4) {
    errors.push_back("nmax: the pdc experiment needs nmax >= 4 to contain heralded pairs");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

std::string render(const ExperimentConfig& c) {
  std::string out;
  for (const auto& k : key_table()) {
    if (auto v = k.get(c)) out += k.name + " = " + *v + "\n";
  }
  for (const auto& a : c.axes) {
    out += "sweep.values = " + a.key;
    for (double v : a.values) out += " " + format_double(v);
    out += "\n";
  }
  return out;
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& c) {
  if (c.kind != ExperimentKind::Sweep) return {c};
  std::vector<ExperimentConfig> points;
  std::vector<std::string> errors;
  std::size_t total = 1;
  for (const auto& a : c.axes) total *= a.values.size();
  for (std::size_t i = 0; i < total; ++i) {
    ExperimentConfig p = c;
    p.kind = c.sweep_base;
    p.axes.clear();
    const std::string where = "sweep point " + std::to_string(i) + ": ";
    // Mixed-radix digits of i, last axis fastest.
    std::size_t rem = i;
    std::vector<std::size_t> idx(c.axes.size());
    for (std::size_t a = c.axes.size(); a-- > 0;) {
      idx[a] = rem % c.axes[a].values.size();
      rem /= c.axes[a].values.size();
    }
    for (std::size_t a = 0; a < c.axes.size(); ++a) {
      const auto& axis = c.axes[a];
      const std::string v = format_double(axis.values[idx[a]]);
      try {
        set_key(p, axis.key, v);
      } catch (const std::exception& e) {
        errors.push_back(where + axis.key + " = " + v + ": " + e.what());
      }
    }
    try {
      validate(p);
    } catch (const ConfigError& e) {
      for (const auto& v : e.violations()) errors.push_back(where + v);
    }
    points.push_back(std::move(p));
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return points;
}

RunConfig to_run_config(const ExperimentConfig& c) {
  const PairSpec pair = PairSpec::from_weight(c.alpha_sq, c.phase);
  Source src = c.kind == ExperimentKind::Pdc
                   ? Source{PdcSource{PdcSpec::from_pair(c.gamma, pair, c.pump_phase), c.phase_averaged}}
                   : Source{IdealSource{pair}};
  RunConfig r;
  r.source = std::move(src);
  for (const auto& name : kDetectorNames) r.detectors[name] = c.detector_model(name);
  r.coincidences = c.coincidences;
  r.veto = c.veto;
  r.postselect = c.postselect;
  r.n_max = c.n_max;
  return r;
}

FluctuationProcess to_process(const ExperimentConfig& c) {
  if (c.channel_process == "constant") {
    ChannelSample s;
    for (int k = 1; k <= 4; ++k) {
      for (Pol p : {Pol::H, Pol::V}) s.set_mu(k, p, c.mu[mu_index(k, p)].value());
    }
    return FluctuationProcess::constant(s);
  }
  if (c.channel_process == "uniform_phases") return FluctuationProcess::uniform_phases();
  if (c.channel_process == "constant_f") return FluctuationProcess::constant_f(c.f_a.value(), c.f_b.value());
  return FluctuationProcess::independent(c.min_mag);
}

}  // namespace polpur
