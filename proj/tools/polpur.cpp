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

// polpur: configuration-driven runner for the purification simulator.
//
//   polpur run    <config> [--verify] [--seed N] [--nmax N] [--out-dir DIR] [--format csv|json]
//                 [--threads N] [-q]
//   polpur sweep  <config> [same flags]
//   polpur verify <config> [same flags]
//
// Exit status: 0 success, 1 verification failure, 2 configuration or usage
// error, 3 I/O error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "polpur/config.hpp"
#include "polpur/runner.hpp"

namespace fs = std::filesystem;
using namespace polpur;

namespace {

constexpr int kExitVerify = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Options {
  std::string config_path;
  bool verify = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> nmax;
  std::string out_dir;
  std::string format;
  unsigned threads = 0;
  bool quiet = false;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path output_dir(const Options& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv("POLPUR_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "out";
}

void write_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

ExperimentConfig load(const Options& o) {
  ExperimentConfig c = parse_config(read_file(o.config_path));
  if (o.seed) c.seed = *o.seed;
  if (o.nmax) set_key(c, "nmax", std::to_string(*o.nmax));
  validate(c);
  return c;
}

int report_verification(const std::vector<PointResult>& points) {
  std::size_t applicable = 0, failed = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!p.verify_applicable) continue;
    ++applicable;
    if (p.verified()) continue;
    ++failed;
    for (const auto& f : p.failures) std::cerr << "point " << i << ": " << f << "\n";
  }
  if (applicable == 0) {
    std::cerr << "verify: no reference applies to this configuration; nothing compared\n";
    return 0;
  }
  std::cout << "verify: " << applicable - failed << "/" << applicable << " points agree with the reference\n";
  return failed == 0 ? 0 : kExitVerify;
}

int do_run(const Options& o, bool force_verify) {
  const ExperimentConfig c = load(o);
  const bool verify = o.verify || force_verify;
  const fs::path dir = output_dir(o);
  const std::string stem = fs::path(o.config_path).stem().string();

  std::vector<PointResult> points;
  if (c.kind == ExperimentKind::Sweep) {
    const SweepResult s = execute_sweep(c, verify, o.threads);
    const bool json = o.format == "json";
    const fs::path path = dir / (stem + (json ? ".json" : ".csv"));
    write_file(path, json ? to_json(c, s).dump(2) + "\n" : to_csv(s));
    if (!o.quiet) std::cout << headline_table(s.points) << "wrote " << path.string() << "\n";
    points = s.points;
  } else {
    const PointResult p = execute_point(c, verify);
    const bool csv = o.format == "csv";
    const fs::path path = dir / (stem + (csv ? ".csv" : ".json"));
    write_file(path, csv ? to_csv({p}) : to_json(c, p).dump(2) + "\n");
    if (!o.quiet) std::cout << headline_table({p}) << "wrote " << path.string() << "\n";
    points.push_back(p);
  }
  return verify ? report_verification(points) : 0;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("config", o.config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_flag("--verify", o.verify, "Compare against the closed-form reference; nonzero exit on disagreement");
  cmd->add_option("--seed", o.seed, "Override the configured RNG seed");
  cmd->add_option("--nmax", o.nmax, "Override the photon-number truncation");
  cmd->add_option("--out-dir", o.out_dir, "Output directory (default $POLPUR_OUT_DIR, else ./out)");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", o.threads, "Sweep workers (default: hardware concurrency)");
  cmd->add_flag("-q,--quiet", o.quiet, "Do not print the result table");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-pair polarization entanglement purification simulator"};
  app.require_subcommand(1);
  Options o;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run with reference verification");
  for (auto* cmd : {run_cmd, sweep_cmd, verify_cmd}) add_common(cmd, o);
  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep_cmd->parsed() && load(o).kind != ExperimentKind::Sweep) {
      std::cerr << "error: " << o.config_path << " is not a sweep (experiment = sweep)\n";
      return kExitConfig;
    }
    return do_run(o, verify_cmd->parsed());
  } catch (const ConfigError& e) {
    std::cerr << o.config_path << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
