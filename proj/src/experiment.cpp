#include "hypersupport/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include "hypersupport/centering.hpp"
#include "json.hpp"

namespace hsup::cli {

using body::VPolytope;
using numkit::Vec;
using numkit::dot;
using numkit::norm;
using numkit::vscale;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d649bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(splitmix(seed ^ a) ^ b));
}

Strategy strategy_from_name(const std::string& name) {
  for (Strategy s : {Strategy::algorithm, Strategy::naive_orthogonal, Strategy::naive_ray_support,
                     Strategy::naive_closest, Strategy::oracle_best}) {
    if (name == verify::strategy_name(s)) return s;
  }
  throw input_error("unknown strategy name: " + name);
}

double parse_double(const std::string& field) {
  double v = 0.0;
  std::size_t used = 0;
  try {
    v = std::stod(field, &used);
  } catch (const std::invalid_argument&) {
    throw input_error("malformed number: " + field);
  } catch (const std::out_of_range&) {
    throw input_error("number out of range: " + field);
  }
  if (used != field.size()) throw input_error("trailing characters in number: " + field);
  return v;
}

std::size_t parse_size(const std::string& field) {
  std::size_t v = 0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw input_error("malformed integer: " + field);
  return v;
}

struct BodyPlan {
  std::size_t n = 0;
  std::string kind;
  double thinness = 0.0;
  VPolytope raw;
  std::uint64_t body_seed = 0;
  std::size_t first_trial_id = 0;
  std::size_t n_dirs = 0;
};

// Chords and support values of the shared oracle candidate set, computed once
// per body; the per-instance oracle scan is then arithmetic only.
struct CandidateCache {
  std::vector<Vec> normals;
  std::vector<double> offsets;
  std::vector<double> chords;
};

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

struct BodyOutcome {
  std::vector<ReportRow> rows;
  int exit_code = 0;
  std::string failure;
  std::string failure_trace_json;
};

BodyOutcome run_body(const BodyPlan& plan, const ExperimentConfig& config) {
  BodyOutcome out;
  const std::size_t n = plan.n;
  const double s0 = config.s0.value(n);

  auto fail = [&](const std::string& where, const std::exception& e, int code,
                  const std::string& trace_json) {
    out.exit_code = code;
    out.failure = where + ": " + e.what();
    out.failure_trace_json = trace_json;
  };

  centering::WellCentered wc;
  try {
    wc = centering::well_center(plan.raw, config.mvee_eps);
  } catch (const input_error& e) {
    fail("well_center of " + plan.kind + " body (trial base " +
             std::to_string(plan.first_trial_id) + ")",
         e, 2, "");
    return out;
  }
  const VPolytope& fb = wc.frame_body;
  const Vec a = wc.semi_axes();

  CandidateCache cache;
  cache.normals =
      verify::detail::candidate_normals(fb, config.oracle_budget, derive_seed(plan.body_seed, 2, 0));
  cache.offsets.reserve(cache.normals.size());
  cache.chords.reserve(cache.normals.size());
  for (const Vec& u : cache.normals) {
    cache.offsets.push_back(body::support_value(fb, u));
    cache.chords.push_back(body::chord_diameter(fb, u));
  }

  std::vector<Vec> dirs;
  for (const Vec& v : fb.vertices) {
    const double len = norm(v);
    if (len < 1e-12) continue;
    dirs.push_back(vscale(v, 1.0 / len));
  }
  if (n >= 2) {
    std::mt19937_64 rng(derive_seed(plan.body_seed, 3, 0));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t d = 0; d < config.random_dirs;) {
      Vec u(n);
      for (double& c : u) c = gauss(rng);
      const double len = norm(u);
      if (len < 1e-12) continue;
      dirs.push_back(vscale(u, 1.0 / len));
      ++d;
    }
  }
  if (dirs.size() != plan.n_dirs) {
    out.exit_code = 1;
    out.failure = "internal: direction count drifted from the trial-id plan";
    return out;
  }

  std::size_t trial_id = plan.first_trial_id;
  for (std::size_t di = 0; di < dirs.size(); ++di) {
    const Vec& dir = dirs[di];
    Vec p_dir, ray_normal;
    double orth_offset = 0.0, orth_chord = 1.0, ray_offset = 0.0, ray_chord = 1.0;
    try {
      p_dir = body::ray_boundary(fb, dir);
      ray_normal = body::supporting_hyperplane_at(fb, p_dir).normal;
      orth_offset = body::support_value(fb, dir);
      orth_chord = body::chord_diameter(fb, dir);
      ray_offset = body::support_value(fb, ray_normal);
      ray_chord = body::chord_diameter(fb, ray_normal);
    } catch (const std::exception& e) {
      fail(plan.kind + " body, direction " + std::to_string(di), e, 1, "");
      return out;
    }

    for (double s_conf : config.s_list) {
      const Vec y = vscale(p_dir, 1.0 - s_conf);

      ReportRow base;
      base.n = n;
      base.trial_id = trial_id;
      base.body_kind = plan.kind;
      base.thinness = plan.thinness;
      base.s = s_conf;
      base.s0 = s0;
      base.case_terminated = "-";

      const std::string where = plan.kind + " body, trial " + std::to_string(trial_id) +
                                ", dir " + std::to_string(di) + ", s " + format_double(s_conf);

      ReportRow alg = base;
      selector::Selection sel;
      try {
        const auto t0 = std::chrono::steady_clock::now();
        sel = selector::select_hyperplane(fb, a, y, s0);
        const verify::RatioReport rep = verify::check_bound(fb, a, y, s0, sel);
        alg.wall_ms = elapsed_ms(t0);
        alg.strategy = Strategy::algorithm;
        alg.ratio = rep.ratio;
        alg.bound = rep.bound;
        alg.depth = rep.depth;
        alg.case_terminated = sel.trace.final.case_terminated;
        for (const auto& step : sel.trace.steps) alg.perturbed = alg.perturbed || step.perturbed;
      } catch (selector::invariant_violation& e) {
        fail(where, e, 1, selector::trace_to_json(e.trace));
        return out;
      } catch (const verify::verification_error& e) {
        fail(where, e, 1, selector::trace_to_json(sel.trace));
        return out;
      } catch (const std::exception& e) {
        fail(where, e, 1, "");
        return out;
      }

      if (!config.trace_dir.empty()) {
        const std::string path =
            config.trace_dir + "/trace_" + std::to_string(trial_id) + ".json";
        std::ofstream f(path);
        if (!f) {
          out.exit_code = 2;
          out.failure = "cannot write trace file " + path;
          return out;
        }
        f << selector::trace_to_json(sel.trace) << '\n';
      }

      const auto t_naive = std::chrono::steady_clock::now();
      ReportRow orth = base;
      orth.strategy = Strategy::naive_orthogonal;
      orth.bound = alg.bound;
      orth.ratio = std::max(orth_offset - dot(dir, y), 0.0) / orth_chord;

      ReportRow ray = base;
      ray.strategy = Strategy::naive_ray_support;
      ray.bound = alg.bound;
      ray.ratio = std::max(ray_offset - dot(ray_normal, y), 0.0) / ray_chord;

      ReportRow closest = base;
      closest.strategy = Strategy::naive_closest;
      closest.bound = alg.bound;
      double best_dist = std::numeric_limits<double>::infinity();
      double best_cache_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < cache.normals.size(); ++c) {
        const double dist = std::max(cache.offsets[c] - dot(cache.normals[c], y), 0.0);
        const double ratio = dist / cache.chords[c];
        if (dist < best_dist) {
          best_dist = dist;
          closest.ratio = ratio;
        }
        best_cache_ratio = std::min(best_cache_ratio, ratio);
      }
      const double naive_ms = elapsed_ms(t_naive) / 3.0;
      orth.wall_ms = naive_ms;
      ray.wall_ms = naive_ms;
      closest.wall_ms = naive_ms;

      ReportRow oracle = base;
      const auto t_oracle = std::chrono::steady_clock::now();
      oracle.strategy = Strategy::oracle_best;
      oracle.bound = alg.bound;
      oracle.ratio = std::min({best_cache_ratio, alg.ratio, orth.ratio, ray.ratio, closest.ratio});
      oracle.wall_ms = elapsed_ms(t_oracle);

      out.rows.push_back(std::move(alg));
      out.rows.push_back(std::move(orth));
      out.rows.push_back(std::move(ray));
      out.rows.push_back(std::move(closest));
      out.rows.push_back(std::move(oracle));
      ++trial_id;
    }
  }
  return out;
}

}  // namespace

double S0Policy::value(std::size_t n) const {
  if (dimension_rule) {
    if (n == 0) throw input_error("s0 policy: n must be >= 1");
    return 1.0 / (2.0 * static_cast<double>(n));
  }
  return fixed;
}

ExperimentConfig config_from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw input_error("config: top level must be an object");

  ExperimentConfig cfg;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "n_list") {
        cfg.n_list = value.get<std::vector<std::size_t>>();
      } else if (key == "trials") {
        cfg.trials = value.get<std::size_t>();
      } else if (key == "s_list") {
        cfg.s_list = value.get<std::vector<double>>();
      } else if (key == "s0") {
        if (value.is_number()) {
          cfg.s0.dimension_rule = false;
          cfg.s0.fixed = value.get<double>();
        } else if (value.is_string() && value.get<std::string>() == "dimension") {
          cfg.s0.dimension_rule = true;
        } else if (value.is_object()) {
          cfg.s0.dimension_rule = value.value("dimension_rule", true);
          cfg.s0.fixed = value.value("fixed", 0.0);
        } else {
          throw input_error("config: s0 must be a number, \"dimension\", or an object");
        }
      } else if (key == "kinds") {
        cfg.kinds.clear();
        for (const auto& item : value) {
          const auto kind = verify::thin_kind_from_name(item.get<std::string>());
          if (!kind) throw input_error("config: unknown kind " + item.get<std::string>());
          cfg.kinds.push_back(*kind);
        }
      } else if (key == "thinness") {
        cfg.thinness = value.get<std::vector<double>>();
      } else if (key == "body_files") {
        cfg.body_files = value.get<std::vector<std::string>>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
        cfg.has_seed = true;
      } else if (key == "random_dirs") {
        cfg.random_dirs = value.get<std::size_t>();
      } else if (key == "oracle_budget") {
        cfg.oracle_budget = value.get<std::size_t>();
      } else if (key == "threads") {
        cfg.threads = value.get<std::size_t>();
      } else if (key == "out") {
        cfg.out = value.get<std::string>();
      } else if (key == "format") {
        cfg.format = value.get<std::string>();
      } else if (key == "plotdata") {
        cfg.plotdata = value.get<std::string>();
      } else if (key == "trace_dir") {
        cfg.trace_dir = value.get<std::string>();
      } else if (key == "mvee_eps") {
        cfg.mvee_eps = value.get<double>();
      } else {
        throw input_error("config: unknown key \"" + key + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("config: type error: ") + e.what());
  }
  return cfg;
}

void validate(const ExperimentConfig& config) {
  if (!config.has_seed) throw input_error("config: seed is required");
  if (config.format != "csv" && config.format != "json")
    throw input_error("config: format must be csv or json");
  if (config.s_list.empty()) throw input_error("config: s_list must be nonempty");
  if (!(config.mvee_eps > 0.0) || config.mvee_eps > 0.1)
    throw input_error("config: mvee_eps must be in (0, 0.1]");
  if (config.body_files.empty()) {
    if (config.n_list.empty()) throw input_error("config: n_list must be nonempty");
    if (config.trials == 0) throw input_error("config: trials must be >= 1");
    if (config.kinds.empty()) throw input_error("config: kinds must be nonempty");
    if (config.thinness.empty()) throw input_error("config: thinness must be nonempty");
    for (double t : config.thinness)
      if (!(t > 0.0) || t > 1.0) throw input_error("config: thinness values must be in (0, 1]");
    for (std::size_t n : config.n_list) {
      if (n == 0) throw input_error("config: n must be >= 1");
      const double s0 = config.s0.value(n);
      if (!(s0 > 0.0) || !(s0 < 1.0))
        throw input_error("config: s0 must land in (0, 1) for every n");
      for (double s : config.s_list) {
        if (!(s > 0.0) || s > s0)
          throw input_error("config: s values must be in (0, s0] for every n; s0(" +
                            std::to_string(n) + ") = " + format_double(s0));
      }
    }
  }
}

RunResult run(const ExperimentConfig& config) {
  RunResult result;
  try {
    validate(config);
  } catch (const std::exception& e) {
    result.exit_code = 2;
    result.failure = e.what();
    return result;
  }

  std::vector<BodyPlan> plans;
  try {
    if (!config.body_files.empty()) {
      for (std::size_t i = 0; i < config.body_files.size(); ++i) {
        BodyPlan p;
        p.raw = body::read_body_file(config.body_files[i]);
        // user-supplied geometry, so the interiority precondition needs a
        // real probe before any gauge query trusts it
        body::assert_origin_interior(p.raw);
        p.n = p.raw.dim;
        p.kind = "file";
        p.thinness = 0.0;
        p.body_seed = derive_seed(config.seed, 1, i);
        plans.push_back(std::move(p));
      }
    } else {
      std::size_t body_index = 0;
      for (std::size_t n : config.n_list) {
        for (std::size_t t = 0; t < config.trials; ++t, ++body_index) {
          BodyPlan p;
          p.n = n;
          p.body_seed = derive_seed(config.seed, 1, body_index);
          if (n == 1) {
            p.kind = "interval";
            p.thinness = 1.0;
            p.raw.dim = 1;
            p.raw.vertices = {{-1.0}, {1.0}};
          } else {
            const std::size_t combo = t % (config.kinds.size() * config.thinness.size());
            const verify::ThinKind kind = config.kinds[combo % config.kinds.size()];
            p.thinness = config.thinness[combo / config.kinds.size()];
            p.kind = verify::thin_kind_name(kind);
            p.raw = verify::thin_family(kind, n, p.thinness, derive_seed(p.body_seed, 4, 0));
          }
          plans.push_back(std::move(p));
        }
      }
    }
  } catch (const std::exception& e) {
    result.exit_code = 2;
    result.failure = e.what();
    return result;
  }

  // Global instance ids are assigned before any work runs, so scheduling
  // cannot change them.
  std::size_t next_id = 0;
  for (BodyPlan& p : plans) {
    std::size_t dirs = 0;
    for (const Vec& v : p.raw.vertices)
      if (norm(v) >= 1e-12) ++dirs;
    if (p.n >= 2) dirs += config.random_dirs;
    p.n_dirs = dirs;
    p.first_trial_id = next_id;
    next_id += dirs * config.s_list.size();
  }

  if (!config.trace_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.trace_dir, ec);
    if (ec) {
      result.exit_code = 2;
      result.failure = "cannot create trace dir " + config.trace_dir + ": " + ec.message();
      return result;
    }
  }

  std::vector<BodyOutcome> outcomes(plans.size());
  std::size_t workers = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  workers = std::max<std::size_t>(workers, 1);
  workers = std::min(workers, plans.size());

  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> abort{false};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= plans.size() || abort.load()) return;
      outcomes[i] = run_body(plans[i], config);
      if (outcomes[i].exit_code != 0) abort.store(true);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  for (BodyOutcome& o : outcomes) {
    if (o.exit_code != 0 && result.exit_code == 0) {
      result.exit_code = o.exit_code;
      result.failure = std::move(o.failure);
      result.failure_trace_json = std::move(o.failure_trace_json);
    }
    for (ReportRow& r : o.rows) result.rows.push_back(std::move(r));
  }

  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const ReportRow& x, const ReportRow& y) {
                     return std::tie(x.n, x.trial_id, x.strategy) <
                            std::tie(y.n, y.trial_id, y.strategy);
                   });

  try {
    emit(result.rows, config);
  } catch (const std::exception& e) {
    if (result.exit_code == 0) {
      result.exit_code = 2;
      result.failure = e.what();
    }
  }
  return result;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw internal_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

std::string to_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "n,trial_id,body_kind,thinness,s,s0,strategy,ratio,bound,depth,case_terminated,"
         "perturbed,wall_ms\n";
  for (const ReportRow& r : rows) {
    out << r.n << ',' << r.trial_id << ',' << r.body_kind << ',' << format_double(r.thinness)
        << ',' << format_double(r.s) << ',' << format_double(r.s0) << ','
        << verify::strategy_name(r.strategy) << ',' << format_double(r.ratio) << ','
        << format_double(r.bound) << ',' << r.depth << ',' << r.case_terminated << ','
        << (r.perturbed ? 1 : 0) << ',' << format_double(r.wall_ms) << '\n';
  }
  return out.str();
}

std::vector<ReportRow> from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw input_error("report csv: empty input");
  const std::string expected =
      "n,trial_id,body_kind,thinness,s,s0,strategy,ratio,bound,depth,case_terminated,"
      "perturbed,wall_ms";
  if (line != expected) throw input_error("report csv: unexpected header");

  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 13) throw input_error("report csv: wrong field count");
    ReportRow r;
    r.n = parse_size(fields[0]);
    r.trial_id = parse_size(fields[1]);
    r.body_kind = fields[2];
    r.thinness = parse_double(fields[3]);
    r.s = parse_double(fields[4]);
    r.s0 = parse_double(fields[5]);
    r.strategy = strategy_from_name(fields[6]);
    r.ratio = parse_double(fields[7]);
    r.bound = parse_double(fields[8]);
    r.depth = parse_size(fields[9]);
    r.case_terminated = fields[10];
    r.perturbed = parse_size(fields[11]) != 0;
    r.wall_ms = parse_double(fields[12]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string to_json_text(const std::vector<ReportRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ReportRow& r : rows) {
    arr.push_back(nlohmann::json{{"n", r.n},
                                 {"trial_id", r.trial_id},
                                 {"body_kind", r.body_kind},
                                 {"thinness", r.thinness},
                                 {"s", r.s},
                                 {"s0", r.s0},
                                 {"strategy", verify::strategy_name(r.strategy)},
                                 {"ratio", r.ratio},
                                 {"bound", r.bound},
                                 {"depth", r.depth},
                                 {"case_terminated", r.case_terminated},
                                 {"perturbed", r.perturbed},
                                 {"wall_ms", r.wall_ms}});
  }
  return arr.dump();
}

std::vector<ReportRow> from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("report json: invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw input_error("report json: top level must be an array");
  std::vector<ReportRow> rows;
  try {
    for (const auto& item : doc) {
      ReportRow r;
      r.n = item.at("n").get<std::size_t>();
      r.trial_id = item.at("trial_id").get<std::size_t>();
      r.body_kind = item.at("body_kind").get<std::string>();
      r.thinness = item.at("thinness").get<double>();
      r.s = item.at("s").get<double>();
      r.s0 = item.at("s0").get<double>();
      r.strategy = strategy_from_name(item.at("strategy").get<std::string>());
      r.ratio = item.at("ratio").get<double>();
      r.bound = item.at("bound").get<double>();
      r.depth = item.at("depth").get<std::size_t>();
      r.case_terminated = item.at("case_terminated").get<std::string>();
      r.perturbed = item.at("perturbed").get<bool>();
      r.wall_ms = item.at("wall_ms").get<double>();
      rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("report json: type error: ") + e.what());
  }
  return rows;
}

std::string plotdata_json(const std::vector<ReportRow>& rows) {
  // Worst ratio per (n, kind, thinness, strategy) at each s: the envelope the
  // bound must dominate for the algorithm and visibly fails to for the naive
  // strategies on degenerating families.
  std::map<std::tuple<std::size_t, std::string, double, Strategy>, std::map<double, double>> acc;
  for (const ReportRow& r : rows) {
    auto& series = acc[{r.n, r.body_kind, r.thinness, r.strategy}];
    auto [it, fresh] = series.emplace(r.s, r.ratio);
    if (!fresh) it->second = std::max(it->second, r.ratio);
  }
  nlohmann::json series_list = nlohmann::json::array();
  for (const auto& [key, points] : acc) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& [s, worst] : points) pts.push_back({{"s", s}, {"worst_ratio", worst}});
    series_list.push_back(nlohmann::json{{"n", std::get<0>(key)},
                                         {"body_kind", std::get<1>(key)},
                                         {"thinness", std::get<2>(key)},
                                         {"strategy", verify::strategy_name(std::get<3>(key))},
                                         {"points", pts}});
  }
  return nlohmann::json{{"series", series_list}}.dump();
}

void emit(const std::vector<ReportRow>& rows, const ExperimentConfig& config) {
  const std::string text = config.format == "json" ? to_json_text(rows) : to_csv(rows);
  if (config.out.empty()) {
    std::cout << text;
    if (config.format == "json") std::cout << '\n';
  } else {
    std::ofstream f(config.out);
    if (!f) throw input_error("cannot write report file " + config.out);
    f << text;
    if (config.format == "json") f << '\n';
  }
  if (!config.plotdata.empty()) {
    std::ofstream f(config.plotdata);
    if (!f) throw input_error("cannot write plotdata file " + config.plotdata);
    f << plotdata_json(rows) << '\n';
  }
}

}  // namespace hsup::cli
