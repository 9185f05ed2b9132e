// Command line front end: generate degenerate test bodies, run a sweep from a
// JSON config, or run an inline sweep. Exit codes: 0 ok, 1 a bound or
// invariant check failed (the offending trace is written next to the report),
// 2 usage or input errors.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hypersupport/experiment.hpp"

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("HYPERSUPPORT_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    return std::stoull(raw);
  } catch (const std::exception&) {
    throw hsup::input_error("HYPERSUPPORT_SEED must be an unsigned integer");
  }
}

hsup::cli::S0Policy parse_s0(const std::string& text) {
  hsup::cli::S0Policy policy;
  if (text == "dimension") {
    policy.dimension_rule = true;
    return policy;
  }
  if (text.rfind("fixed:", 0) == 0) {
    policy.dimension_rule = false;
    try {
      policy.fixed = std::stod(text.substr(6));
    } catch (const std::exception&) {
      throw hsup::input_error("bad s0 value: " + text);
    }
    return policy;
  }
  throw hsup::input_error("s0 must be \"dimension\" or \"fixed:<value>\"");
}

int finish_run(const hsup::cli::RunResult& result, const std::string& trace_dir) {
  if (result.exit_code == 0) {
    std::cerr << "ok: " << result.rows.size() << " rows, no violations\n";
    return 0;
  }
  std::cerr << (result.exit_code == 1 ? "violation: " : "error: ") << result.failure << '\n';
  if (!result.failure_trace_json.empty()) {
    const std::string path =
        (trace_dir.empty() ? std::string{} : trace_dir + "/") + "violation_trace.json";
    std::ofstream f(path);
    if (f) {
      f << result.failure_trace_json << '\n';
      std::cerr << "trace written to " << path << '\n';
    }
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"supporting-hyperplane distance experiments"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write one degenerate body as JSON");
  std::string gen_kind = "box";
  std::size_t gen_n = 3;
  double gen_thinness = 1e-2;
  std::uint64_t gen_seed = 0;
  bool gen_has_seed = false;
  std::string gen_out;
  gen->add_option("--kind", gen_kind, "box | needle_simplex | slab_cross")
      ->check(CLI::IsMember({"box", "needle_simplex", "slab_cross"}));
  gen->add_option("--n", gen_n, "dimension, >= 2")->required();
  gen->add_option("--thinness", gen_thinness, "smallest-to-largest axis ratio, in (0, 1]");
  gen->add_option("--seed", gen_seed, "rotate by a seeded random orthogonal map")
      ->each([&](const std::string&) { gen_has_seed = true; });
  gen->add_option("--out", gen_out, "output path; stdout when omitted");

  // run
  auto* run_cmd = app.add_subcommand("run", "run the sweep described by a JSON config");
  std::string run_config;
  run_cmd->add_option("--config", run_config, "config JSON path")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run an inline sweep");
  hsup::cli::ExperimentConfig cfg;
  std::string sweep_s0 = "dimension";
  std::uint64_t sweep_seed = 0;
  bool sweep_has_seed = false;
  std::vector<std::string> sweep_kinds;
  sweep->add_option("--n", cfg.n_list, "dimensions")->delimiter(',');
  sweep->add_option("--s", cfg.s_list, "boundary-distance parameters")->delimiter(',');
  sweep->add_option("--trials", cfg.trials, "bodies per dimension");
  sweep->add_option("--s0", sweep_s0, "dimension (s0 = 1/(2n)) | fixed:<value>");
  sweep->add_option("--kinds", sweep_kinds, "body kinds to cycle")->delimiter(',');
  sweep->add_option("--thinness", cfg.thinness, "thinness values to cycle")->delimiter(',');
  sweep->add_option("--body", cfg.body_files, "body JSON files (replaces generation)");
  sweep->add_option("--seed", sweep_seed, "master seed")
      ->each([&](const std::string&) { sweep_has_seed = true; });
  sweep->add_option("--random-dirs", cfg.random_dirs, "extra random directions per body");
  sweep->add_option("--oracle-budget", cfg.oracle_budget, "random candidate planes per body");
  sweep->add_option("--threads", cfg.threads, "worker threads; 0 = hardware");
  sweep->add_option("--out", cfg.out, "report path; stdout when omitted");
  sweep->add_option("--format", cfg.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--plotdata", cfg.plotdata, "write worst-ratio series JSON here");
  sweep->add_option("--trace-dir", cfg.trace_dir, "write one selection trace per instance");
  sweep->add_option("--mvee-eps", cfg.mvee_eps, "centering ellipsoid tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (gen->parsed()) {
      const auto kind = hsup::verify::thin_kind_from_name(gen_kind);
      if (!gen_has_seed) {
        if (const auto env = env_seed()) {
          gen_seed = *env;
          gen_has_seed = true;
        }
      }
      const auto body = hsup::verify::thin_family(
          *kind, gen_n, gen_thinness,
          gen_has_seed ? std::optional<std::uint64_t>(gen_seed) : std::nullopt);
      const std::string text = hsup::body::body_to_json(body);
      if (gen_out.empty()) {
        std::cout << text << '\n';
      } else {
        std::ofstream f(gen_out);
        if (!f) throw hsup::input_error("cannot write " + gen_out);
        f << text << '\n';
      }
      return 0;
    }

    if (run_cmd->parsed()) {
      std::ifstream f(run_config);
      if (!f) throw hsup::input_error("cannot read config " + run_config);
      std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
      auto parsed = hsup::cli::config_from_json_text(text);
      if (!parsed.has_seed) {
        if (const auto env = env_seed()) {
          parsed.seed = *env;
          parsed.has_seed = true;
        }
      }
      return finish_run(hsup::cli::run(parsed), parsed.trace_dir);
    }

    // sweep
    cfg.s0 = parse_s0(sweep_s0);
    if (!sweep_kinds.empty()) {
      cfg.kinds.clear();
      for (const std::string& name : sweep_kinds) {
        const auto kind = hsup::verify::thin_kind_from_name(name);
        if (!kind) throw hsup::input_error("unknown kind " + name);
        cfg.kinds.push_back(*kind);
      }
    }
    if (sweep_has_seed) {
      cfg.seed = sweep_seed;
      cfg.has_seed = true;
    } else if (const auto env = env_seed()) {
      cfg.seed = *env;
      cfg.has_seed = true;
    }
    return finish_run(hsup::cli::run(cfg), cfg.trace_dir);
  } catch (const hsup::input_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
