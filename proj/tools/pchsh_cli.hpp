// Copyright 2026 The pchsh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. run() is separate from main() so the tests can
// drive it in-process.

#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pchsh/bell.hpp"
#include "pchsh/errors.hpp"
#include "pchsh/monogamy.hpp"
#include "pchsh/npa.hpp"
#include "pchsh/randomness.hpp"
#include "pchsh/scan.hpp"
#include "pchsh/state_io.hpp"

namespace pchsh::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidation = 2,
  kIo = 3,
  kNumerical = 4,
};

using Json = nlohmann::ordered_json;

/// Bad flag combination detected after parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Rounds to 12 significant digits so the JSON text is stable.
inline double round12(double v) { return std::strtod(format_g12(v).c_str(), nullptr); }

inline Json vec_json(const Vec3& v) {
  return Json::array({round12(v(0)), round12(v(1)), round12(v(2))});
}

inline Json frame_json(const MeasurementFrame& f) {
  Json j;
  j["a"] = vec_json(f.a.vec());
  j["a_prime"] = vec_json(f.a_prime.vec());
  j["b"] = vec_json(f.b.vec());
  j["b_prime"] = vec_json(f.b_prime.vec());
  j["c"] = vec_json(f.c.vec());
  return j;
}

inline Json outcome_json(const npa::Outcome& o) {
  return Json{{"a", o.a}, {"b", o.b}, {"c", o.c}, {"x", o.x}, {"y", o.y}};
}

inline Json report_json(const monogamy::Report& r) {
  Json values;
  for (std::size_t i = 0; i < 4; ++i) values[monogamy::kTripleNames[i]] = round12(r.values[i]);
  return Json{{"theta", round12(r.theta)},
              {"phi", round12(r.phi)},
              {"values", values},
              {"sum_sq", round12(r.sum_sq)}};
}

struct BoundArgs {
  std::string family;
  double p = 0.0;
  std::string state;
  int grid = 64;
  int refine_iters = 200;
  int refine_starts = 3;
  int see_saw_restarts = 32;
  std::uint64_t seed = 1;
};

struct ScanArgs {
  double p_min = 0.0;
  double p_max = 1.0;
  int steps = 21;
  bool npa = false;
  double npa_tol = 1e-3;
  std::string out;
};

struct NpaArgs {
  double bell = 0.0;
  double tol = 1e-3;
};

struct MonogamyArgs {
  long samples = 100000;
  std::uint64_t seed = 7;
  double theta = 0.0;
  double phi = 0.0;
  int restarts = 64;
};

inline Json cmd_bound(const BoundArgs& a) {
  if (a.family.empty() == a.state.empty())
    throw UsageError("bound: give exactly one of --family or --state");
  std::optional<DensityMatrix> rho;
  if (!a.state.empty()) {
    rho = load_state(a.state);
    if (rho->num_qubits() != 3)
      throw ValidationError("bound: state must have 3 qubits");
  } else {
    if (!(a.p >= 0.0 && a.p <= 1.0))
      throw InvalidInput("bound: --p must lie in [0, 1]");
    rho = white_noise_state(a.p);
  }
  BoundOptions opt;
  opt.grid_n = a.grid;
  opt.refine_iters = a.refine_iters;
  opt.refine_starts = a.refine_starts;
  const Theorem1Result r = theorem1_bound(*rho, opt);
  Json config{{"subcommand", "bound"},
              {"family", a.family.empty() ? Json(nullptr) : Json(a.family)},
              {"p", a.family.empty() ? Json(nullptr) : Json(round12(a.p))},
              {"state", a.state.empty() ? Json(nullptr) : Json(a.state)},
              {"grid", a.grid},
              {"refine_iters", a.refine_iters},
              {"refine_starts", a.refine_starts},
              {"see_saw_restarts", a.see_saw_restarts},
              {"seed", a.seed}};
  Json out;
  out["config"] = config;
  out["bound"] = round12(r.bound);
  out["lambda1"] = round12(r.lambda1);
  out["lambda2"] = round12(r.lambda2);
  out["c_star"] = vec_json(r.c_star.vec());
  out["frame"] = frame_json(r.frame);
  out["frame_value"] = round12(bell_value(*rho, r.frame));
  out["saturated"] = r.saturated;
  if (a.see_saw_restarts > 0)
    out["see_saw_value"] = round12(see_saw_maximize(*rho, a.see_saw_restarts, a.seed).value);
  return out;
}

inline Json scan_config(const ScanArgs& a) {
  return Json{{"subcommand", "scan"},   {"p_min", round12(a.p_min)},
              {"p_max", round12(a.p_max)}, {"steps", a.steps},
              {"npa", a.npa},           {"npa_tol", round12(a.npa_tol)},
              {"family", "white-noise"}, {"c", Json::array({0, 0, 1})}};
}

inline std::string cmd_scan(const ScanArgs& a) {
  if (a.steps < 2) throw UsageError("scan: --steps must be >= 2");
  if (!(a.p_min >= 0.0 && a.p_max <= 1.0))
    throw UsageError("scan: --p-min and --p-max must lie in [0, 1]");
  if (!(a.p_min < a.p_max)) throw UsageError("scan: empty range, need --p-min < --p-max");
  ScanOptions opt;
  opt.npa.tol = a.npa_tol;
  const auto rows = noise_scan(a.p_min, a.p_max, a.steps, a.npa, opt);
  return scan_csv(rows, "config: " + scan_config(a).dump());
}

inline Json cmd_lhv() {
  const LhvResult r = lhv_bound();
  Json out;
  out["config"] = Json{{"subcommand", "lhv"}};
  out["max"] = round12(r.max);
  out["min"] = round12(r.min);
  Json list = Json::array();
  for (const auto& s : r.maximizers)
    list.push_back(Json{{"a0", s.outcomes[0]},
                        {"a1", s.outcomes[1]},
                        {"b0", s.outcomes[2]},
                        {"b1", s.outcomes[3]},
                        {"c0", s.outcomes[4]}});
  out["maximizers"] = list;
  return out;
}

inline Json cmd_npa(const NpaArgs& a) {
  npa::UpperBoundOptions opt;
  opt.tol = a.tol;
  const npa::UpperBound r = npa::npa_upper_bound(a.bell, opt);
  Json out;
  out["config"] = Json{{"subcommand", "npa"}, {"bell", round12(a.bell)}, {"tol", round12(a.tol)}};
  out["upper"] = round12(r.value);
  out["lower"] = round12(r.lower);
  out["uncertainty"] = round12(r.uncertainty);
  out["argmax"] = outcome_json(r.argmax);
  out["solves"] = r.solves;
  out["inconclusive_steps"] = r.inconclusive_steps;
  if (r.inconclusive_steps > 0)
    out["warning"] = "some solves were inconclusive and were treated as feasible";
  return out;
}

inline Json cmd_monogamy_sample(const MonogamyArgs& a) {
  if (a.samples < 1) throw UsageError("monogamy: --samples must be >= 1");
  const auto r = monogamy::sample_relation(a.samples, a.seed);
  Json out;
  out["config"] = Json{{"subcommand", "monogamy"}, {"samples", a.samples}, {"seed", a.seed}};
  out["samples"] = r.samples;
  out["violations"] = r.violations;
  out["exclusivity_failures"] = r.exclusivity_failures;
  out["max_sum_sq"] = round12(r.max_report.sum_sq);
  out["max_report"] = report_json(r.max_report);
  return out;
}

inline Json cmd_monogamy_probe(const MonogamyArgs& a) {
  if (a.restarts < 1) throw UsageError("probe: --restarts must be >= 1");
  const auto r = monogamy::probe_maximum(a.theta, a.phi, a.restarts, a.seed);
  Json out;
  out["config"] = Json{{"subcommand", "monogamy probe"},
                       {"theta", round12(a.theta)},
                       {"phi", round12(a.phi)},
                       {"restarts", a.restarts},
                       {"seed", a.seed}};
  out["report"] = report_json(r.report);
  out["max_sum_sq"] = round12(r.report.sum_sq);
  out["within_bound"] = monogamy::within_bound(r.report);
  return out;
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("failed writing " + path);
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parity-CHSH bounds, randomness certification and monogamy checks"};
  app.name("pchsh");
  app.require_subcommand(1);

  BoundArgs bound_args;
  auto* bound = app.add_subcommand("bound", "Maximal quantum value for a three-qubit state");
  auto* family = bound->add_option("--family", bound_args.family, "State family")
                     ->check(CLI::IsMember({"white-noise"}));
  bound->add_option("--p", bound_args.p, "Visibility of the white-noise family")->needs(family);
  bound->add_option("--state", bound_args.state, "JSON state file")->excludes(family);
  bound->add_option("--grid", bound_args.grid, "Grid points per angle")
      ->capture_default_str()
      ->check(CLI::Range(8, 4096));
  bound->add_option("--refine-iters", bound_args.refine_iters, "Nelder-Mead iterations")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  bound->add_option("--refine-starts", bound_args.refine_starts, "Grid maxima refined")
      ->capture_default_str()
      ->check(CLI::Range(1, 64));
  bound->add_option("--see-saw-restarts", bound_args.see_saw_restarts,
                    "Direct-maximization restarts (0 disables)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  bound->add_option("--seed", bound_args.seed, "Seed for the direct maximization")
      ->capture_default_str();

  ScanArgs scan_args;
  auto* scan = app.add_subcommand("scan", "CSV scan over the white-noise visibility");
  scan->add_option("--p-min", scan_args.p_min, "Smallest visibility")->capture_default_str();
  scan->add_option("--p-max", scan_args.p_max, "Largest visibility")->capture_default_str();
  scan->add_option("--steps", scan_args.steps, "Number of rows")->capture_default_str();
  scan->add_flag("--npa", scan_args.npa, "Add the NPA upper bound column");
  scan->add_option("--npa-tol", scan_args.npa_tol, "NPA bisection width")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  scan->add_option("--out", scan_args.out, "Output path (stdout if omitted)");

  auto* lhv = app.add_subcommand("lhv", "Classical bound by enumeration");

  NpaArgs npa_args;
  auto* npa = app.add_subcommand("npa", "Level-2 NPA upper bound on the guessing probability");
  npa->add_option("--bell", npa_args.bell, "Observed Bell value")
      ->required()
      ->check(CLI::Range(0.0, std::numbers::sqrt2 + 1e-12));
  npa->add_option("--tol", npa_args.tol, "Bisection width")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  MonogamyArgs mono_args;
  auto* mono = app.add_subcommand("monogamy", "Sum of squared Bell values on the GHZ class");
  mono->require_subcommand(0, 1);
  mono->add_option("--samples", mono_args.samples, "Random samples")->capture_default_str();
  mono->add_option("--seed", mono_args.seed, "Sampling seed")->capture_default_str();
  auto* probe = mono->add_subcommand("probe", "Maximize the sum at fixed (theta, phi)");
  probe->add_option("--theta", mono_args.theta, "State angle theta")->required();
  probe->add_option("--phi", mono_args.phi, "State angle phi")->required();
  probe->add_option("--restarts", mono_args.restarts, "Optimizer restarts")
      ->capture_default_str();
  probe->add_option("--seed", mono_args.seed, "Optimizer seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (bound->parsed()) {
      out << cmd_bound(bound_args).dump(2) << "\n";
    } else if (scan->parsed()) {
      write_text(scan_args.out, cmd_scan(scan_args), out);
    } else if (lhv->parsed()) {
      out << cmd_lhv().dump(2) << "\n";
    } else if (npa->parsed()) {
      out << cmd_npa(npa_args).dump(2) << "\n";
    } else if (probe->parsed()) {
      out << cmd_monogamy_probe(mono_args).dump(2) << "\n";
    } else if (mono->parsed()) {
      const Json r = cmd_monogamy_sample(mono_args);
      out << r.dump(2) << "\n";
      if (r["violations"].get<long>() != 0) {
        err << "error: monogamy bound violated\n";
        return kNumerical;
      }
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}

}  // namespace pchsh::cli
