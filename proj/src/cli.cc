// Copyright 2026 The stretchsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stretchsim/cli.h"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <future>
#include <stdexcept>

#include "stretchsim/report.h"

namespace stretchsim {

namespace {

std::string sanitize(std::string_view variant) {
  std::string out(variant);
  std::replace_if(out.begin(), out.end(), [](char c) { return c == '/' || c == '\\'; }, '_');
  return out;
}

int report_validation(const ValidationError &e, const std::string &source, std::ostream &err) {
  for (const auto &d : e.diagnostics()) err << format_diagnostic(d, source) << "\n";
  return kExitInvalid;
}

}  // namespace

Scenario prepare_scenario(const RunManifest &manifest) {
  Scenario scenario = load_scenario_file(manifest.scenario_path);
  for (const auto &kv : manifest.policy_overrides) apply_policy_override(scenario.policy, kv);
  check_policy(scenario.policy);
  if (manifest.seed && !reseed(scenario, *manifest.seed)) scenario.seed = *manifest.seed;
  return scenario;
}

std::vector<CompareRow> compare_variants(const Scenario &scenario,
                                         const std::vector<std::string> &variants,
                                         const std::optional<std::filesystem::path> &output_dir) {
  if (variants.size() < 2) throw std::invalid_argument("compare needs at least two variants");
  std::vector<Scenario> runs;
  for (const auto &v : variants) {
    Scenario s = scenario;
    s.policy = parse_variant(v, scenario.policy);
    check_policy(s.policy);
    runs.push_back(std::move(s));
  }

  std::vector<std::future<CompareRow>> futures;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    futures.push_back(std::async(std::launch::async, [&, i] {
      RunResult result = run(runs[i]);
      if (output_dir) {
        write_report(*output_dir / fmt::format("{:02}-{}", i, sanitize(variants[i])), runs[i],
                     result);
      }
      const Metrics &m = result.metrics;
      return CompareRow{variants[i], m.gpu_utilization, m.total_gpu.hours(),
                        m.pods.pending + m.pods.failed, m.preemptions};
    }));
  }
  std::vector<CompareRow> rows;
  for (auto &f : futures) rows.push_back(f.get());
  return rows;
}

std::string compare_csv(const std::vector<CompareRow> &rows) {
  std::string out = "variant,utilization,gpu_hours,pending,preemptions\n";
  for (const auto &r : rows) {
    out += fmt::format("{},{:.6f},{:.6f},{},{}\n", r.variant, r.utilization, r.gpu_hours,
                       r.pending, r.preemptions);
  }
  return out;
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Discrete-event simulator for multi-tenant stretched GPU clusters", "stretchsim"};
  app.require_subcommand(1);

  std::string validate_path;
  auto *validate = app.add_subcommand("validate", "Check a scenario file and report diagnostics");
  validate->add_option("path", validate_path, "Scenario file")->required();

  RunManifest manifest;
  std::string run_path;
  auto *run_cmd = app.add_subcommand("run", "Simulate a scenario and write reports");
  run_cmd->add_option("path", run_path, "Scenario file")->required();
  run_cmd->add_option("--seed", manifest.seed, "Override the workload generator seed");
  run_cmd->add_option("--out", manifest.output_dir, "Output directory");
  run_cmd->add_option("--policy", manifest.policy_overrides, "Policy override KEY=VALUE")
      ->allow_extra_args(false);

  std::string compare_path;
  std::vector<std::string> variants;
  std::optional<std::string> compare_out;
  std::optional<std::uint64_t> compare_seed;
  auto *compare = app.add_subcommand("compare", "Run policy variants on the same workload");
  compare->add_option("path", compare_path, "Scenario file")->required();
  compare->add_option("--variants", variants, "Comma-separated variants, e.g. fifo,fifo+backfill")
      ->delimiter(',')
      ->required();
  compare->add_option("--out", compare_out, "Directory for compare.csv and per-variant reports");
  compare->add_option("--seed", compare_seed, "Override the workload generator seed");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  std::string source;
  try {
    if (validate->parsed()) {
      source = validate_path;
      load_scenario_file(validate_path);
      out << "ok\n";
      return kExitOk;
    }
    if (run_cmd->parsed()) {
      source = run_path;
      manifest.scenario_path = run_path;
      Scenario scenario = prepare_scenario(manifest);
      RunResult result = run(scenario);
      write_report(manifest.output_dir, scenario, result);
      out << summary_text(scenario, result.metrics);
      return kExitOk;
    }
    source = compare_path;
    RunManifest m;
    m.scenario_path = compare_path;
    m.seed = compare_seed;
    Scenario scenario = prepare_scenario(m);
    std::optional<std::filesystem::path> dir;
    if (compare_out) dir = *compare_out;
    const std::string csv = compare_csv(compare_variants(scenario, variants, dir));
    if (dir) {
      std::ofstream f(*dir / "compare.csv", std::ios::binary | std::ios::trunc);
      if (!(f << csv)) throw std::runtime_error(fmt::format("cannot write {}/compare.csv", *compare_out));
    }
    out << csv;
    return kExitOk;
  } catch (const ValidationError &e) {
    return report_validation(e, source, err);
  } catch (const std::invalid_argument &e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace stretchsim
