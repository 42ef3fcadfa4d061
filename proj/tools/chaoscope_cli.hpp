#pragma once

// The `chaoscope` command line. run() takes argv-style arguments and two
// streams so that tests can drive it in-process.
//
// Exit status: 0 ok, 1 a checked property failed, 2 usage, input or budget error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "chaoscope/bigint.hpp"
#include "chaoscope/bouquet.hpp"
#include "chaoscope/chaos_analysis.hpp"
#include "chaoscope/cover_dsl.hpp"
#include "chaoscope/graph_core.hpp"
#include "chaoscope/limit_dynamics.hpp"
#include "chaoscope/verification.hpp"

namespace chaoscope::cli {

enum ExitCode
{
  ok = 0,
  property_failed = 1,
  usage_error = 2,
};

class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig
{
  std::string command;
  std::uint64_t seed = 0;
  std::string format = "text";
  std::string out_dir;
  std::string cover_path;
  std::string scan_budget;   // decimal, empty = default or CHAOSCOPE_BUDGET
  std::string vertex_budget; // decimal, empty = default
  bool force = false;

  // handle
  std::size_t spine = 2;
  std::size_t cycle = 1;
  std::string pos = "1";
  std::string time = "0";
  // second handle (distance)
  std::size_t cycle_b = 1;
  std::string pos_b = "2";
  std::string time_b = "0";

  std::size_t obs = 1;
  std::string horizon = "10";
  std::size_t max_level = 3;
  std::size_t level = 1;
  std::size_t m = 1;
  std::size_t j = 1;
  std::size_t pairs = 100;
  std::size_t count = 100;
  std::size_t prox_level = 2;
  std::size_t sep_level = 3;
  double min_separation = 0.9;
  std::size_t windows = 10;
  std::string window_length;
  std::string window;
  std::size_t max_results = 20;
  std::string file;
  std::optional<int> criterion;
  bool all = false;
};

namespace detail {

inline BigInt parse_big(const std::string& text, const std::string& what)
{
  try {
    return parse_decimal(text);
  } catch (const std::invalid_argument&) {
    throw UsageError(what + ": '" + text + "' is not an integer");
  }
}

/// Output sink: stdout, or a file under --out recorded in the manifest.
class Artifacts
{
public:
  Artifacts(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out)
  {
    if (!cfg_.out_dir.empty())
      std::filesystem::create_directories(cfg_.out_dir);
  }

  void emit(const std::string& name, const std::string& content)
  {
    if (cfg_.out_dir.empty()) {
      out_ << content;
      return;
    }
    const auto path = std::filesystem::path(cfg_.out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f)
      throw UsageError("cannot write " + path.string());
    f << content;
    files_.push_back({{"name", name}, {"bytes", content.size()}});
  }

  void finish(const nlohmann::json& parameters, int status)
  {
    if (cfg_.out_dir.empty())
      return;
    nlohmann::json manifest{{"tool", "chaoscope"},
                            {"command", cfg_.command},
                            {"parameters", parameters},
                            {"exit_status", status},
                            {"files", files_}};
    std::ofstream f(std::filesystem::path(cfg_.out_dir) / "manifest.json", std::ios::binary);
    f << manifest.dump(2) << "\n";
  }

private:
  const RunConfig& cfg_;
  std::ostream& out_;
  nlohmann::json files_ = nlohmann::json::array();
};

class Session
{
public:
  Session(const RunConfig& cfg, std::ostream& out, std::ostream& err) : cfg(cfg), out(out), err(err), artifacts(cfg, out)
  {
    if (!cfg.scan_budget.empty())
      scan_budget = parse_big(cfg.scan_budget, "--budget");
    else if (const char* env = std::getenv("CHAOSCOPE_BUDGET"))
      scan_budget = parse_big(env, "CHAOSCOPE_BUDGET");
    if (!cfg.vertex_budget.empty())
      vertex_budget = parse_big(cfg.vertex_budget, "--vertex-budget");
    if (scan_budget < 0 || vertex_budget < 0)
      throw UsageError("budgets must be non-negative");
    if (!cfg.cover_path.empty()) {
      std::ifstream f(cfg.cover_path);
      if (!f)
        throw UsageError("cannot read " + cfg.cover_path);
      std::stringstream text;
      text << f.rdbuf();
      try {
        custom_ = std::make_unique<ExplicitTower>(dsl::to_tower(dsl::parse(text.str())));
      } catch (const dsl::DslError& e) {
        throw UsageError(cfg.cover_path + ": " + e.what());
      } catch (const std::invalid_argument& e) {
        throw UsageError(cfg.cover_path + ": " + e.what());
      }
    }
  }

  const CoverTower& tower() const { return custom_ ? static_cast<const CoverTower&>(*custom_) : builtin_tower(); }

  void require_level(std::size_t n) const
  {
    if (!tower().has_level(n))
      throw UsageError("level " + std::to_string(n) + " is not available (top level " +
                       std::to_string(tower().top_level().value_or(0)) + ")");
  }

  void check_spine(std::size_t spine) const
  {
    if (spine > 20 && !cfg.force)
      throw UsageError("spine level " + std::to_string(spine) + " is above 20; pass --force to allow it");
    if (spine > 12)
      err << "warning: spine level " << spine << " makes every address tens of thousands of digits long\n";
    require_level(spine);
  }

  PointHandle handle(std::size_t cycle, const std::string& pos, const std::string& time) const
  {
    check_spine(cfg.spine);
    if (cycle == 0) {
      PointHandle p = fixed_point(cfg.spine);
      p.time = parse_big(time, "--time");
      return p;
    }
    PointHandle h = make_handle(tower(), cfg.spine, cycle, parse_big(pos, "--pos"));
    return step(tower(), h, parse_big(time, "--time"));
  }

  PointHandle handle_a() const { return handle(cfg.cycle, cfg.pos, cfg.time); }
  PointHandle handle_b() const { return handle(cfg.cycle_b, cfg.pos_b, cfg.time_b); }

  bool json() const { return cfg.format == "json"; }

  nlohmann::json parameters() const
  {
    return {{"seed", cfg.seed},
            {"scan_budget", to_decimal(scan_budget)},
            {"vertex_budget", to_decimal(vertex_budget)},
            {"cover", cfg.cover_path.empty() ? nlohmann::json("builtin") : nlohmann::json(cfg.cover_path)}};
  }

  const RunConfig& cfg;
  std::ostream& out;
  std::ostream& err;
  Artifacts artifacts;
  BigInt scan_budget = default_scan_budget;
  BigInt vertex_budget = default_vertex_budget;

private:
  std::unique_ptr<ExplicitTower> custom_;
};

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_levels(Session& s)
{
  const auto& cfg = s.cfg;
  s.require_level(cfg.max_level);
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream text;
  text << "level  cycle  length\n";
  for (std::size_t n = 0; n <= cfg.max_level; ++n) {
    const auto spec = s.tower().spec(n);
    rows.push_back(to_json(*spec));
    for (std::size_t i = 1; i <= spec->cycle_count(); ++i)
      text << n << "  " << i << "  " << to_decimal(spec->cycle_length(i)) << "\n";
    text << n << "  k  " << to_decimal(spec->k_value) << "\n";
  }
  s.artifacts.emit(s.json() ? "levels.json" : "levels.txt", s.json() ? dump(rows) : text.str());
  return ok;
}

inline int cmd_validate(Session& s)
{
  const auto& cfg = s.cfg;
  s.require_level(cfg.max_level);
  graph::GraphPtr lower;
  std::size_t total = 0;
  nlohmann::json report = nlohmann::json::array();
  std::ostringstream text;
  for (std::size_t n = 1; n <= cfg.max_level; ++n) {
    const auto lvl = materialize_level(s.tower(), n, s.vertex_budget, lower);
    lower = lvl.graph;
    const auto& cover = *lvl.cover_down;
    std::vector<graph::Violation> all = graph::validate_edge_surjective(cover.source());
    for (auto* more : {&graph::validate_homomorphism, &graph::validate_bidirectional}) {
      auto v = (*more)(cover);
      all.insert(all.end(), v.begin(), v.end());
    }
    total += all.size();
    nlohmann::json first = nlohmann::json::array();
    for (std::size_t i = 0; i < all.size() && i < 10; ++i)
      first.push_back(graph::describe(all[i]));
    report.push_back({{"cover", "G_" + std::to_string(n) + " -> G_" + std::to_string(n - 1)},
                      {"vertices", cover.source().vertex_count()},
                      {"violations", all.size()},
                      {"first_violations", first}});
    text << "G_" << n << " -> G_" << n - 1 << ": " << cover.source().vertex_count() << " vertices, " << all.size()
         << " violations\n";
    for (const auto& d : first)
      text << "  " << d.get<std::string>() << "\n";
  }
  s.artifacts.emit(s.json() ? "validate.json" : "validate.txt", s.json() ? dump(report) : text.str());
  return total == 0 ? ok : property_failed;
}

inline int cmd_materialize(Session& s)
{
  const auto& cfg = s.cfg;
  s.require_level(cfg.level);
  const auto spec = s.tower().spec(cfg.level);
  const auto g = materialize_graph(s.tower(), cfg.level, s.vertex_budget);
  const std::string name = "G_" + std::to_string(cfg.level);
  if (cfg.format == "dot") {
    std::ostringstream os;
    graph::write_dot(os, *g, name);
    s.artifacts.emit(name + ".dot", os.str());
  } else {
    const auto stats = graph::stats_json(cfg.level, *g, spec->cycle_lengths);
    if (s.json()) {
      s.artifacts.emit(name + ".json", dump(stats));
    } else {
      s.artifacts.emit(name + ".txt", name + ": " + std::to_string(g->vertex_count()) + " vertices, " +
                                          std::to_string(g->edges().size()) + " edges\n");
    }
  }
  return ok;
}

inline int cmd_orbit(Session& s)
{
  const auto& cfg = s.cfg;
  const PointHandle h = s.handle_a();
  if (cfg.obs > cfg.spine)
    throw UsageError("--obs must not exceed --spine");
  const BigInt horizon = parse_big(cfg.horizon, "--horizon");
  if (horizon < 0)
    throw UsageError("--horizon must be non-negative");
  if (horizon > s.scan_budget)
    throw BudgetExceeded("orbit trace", horizon, s.scan_budget);
  require_valid_time(s.tower(), h, h.time + horizon);
  std::ostringstream os;
  if (cfg.format == "json" || cfg.format == "jsonl") {
    write_orbit_jsonl(os, s.tower(), h, cfg.obs, horizon);
    s.artifacts.emit("orbit.jsonl", os.str());
  } else {
    write_orbit_csv(os, s.tower(), h, cfg.obs, horizon);
    s.artifacts.emit("orbit.csv", os.str());
  }
  return ok;
}

inline int cmd_distance(Session& s)
{
  const PointHandle a = s.handle_a();
  const PointHandle b = s.handle_b();
  const DistanceValue d = distance(s.tower(), a, b);
  if (s.json())
    s.artifacts.emit("distance.json", dump({{"a", to_json(a)}, {"b", to_json(b)}, {"distance", to_json(d)}}));
  else
    s.artifacts.emit("distance.txt", "d = " + to_string(d) + "\n");
  return ok;
}

inline int cmd_liyorke(Session& s)
{
  const auto& cfg = s.cfg;
  s.check_spine(cfg.spine);
  const BigInt horizon = parse_big(cfg.horizon, "--horizon");
  if (cfg.prox_level > cfg.spine || cfg.sep_level > cfg.spine)
    throw UsageError("witness levels must not exceed --spine");
  std::size_t proximal = 0, separated = 0, pairs = 0;
  nlohmann::json reports = nlohmann::json::array();
  for (std::uint64_t k = 0; pairs < cfg.pairs; ++k) {
    if (k > 100 * (cfg.pairs + 1))
      throw UsageError("could not draw distinct pairs");
    const std::uint64_t seed = derive_seed(cfg.seed ^ 0x9, k);
    HandleSampler sampler(s.tower(), cfg.spine, horizon, seed);
    const PointHandle a = sampler.next();
    const PointHandle b = sampler.next();
    if (!distance(s.tower(), a, b).is_exact())
      continue;
    ++pairs;
    auto rep = li_yorke_test(s.tower(), a, b, horizon, cfg.prox_level, cfg.sep_level);
    rep.seed = seed;
    proximal += rep.proximal.has_value();
    separated += rep.separation.has_value();
    reports.push_back(to_json(rep));
  }
  const bool pass = proximal == pairs && static_cast<double>(separated) >= cfg.min_separation * pairs;
  nlohmann::json summary{{"seed", cfg.seed},
                         {"spine", cfg.spine},
                         {"horizon", to_decimal(horizon)},
                         {"pairs", pairs},
                         {"proximal", proximal},
                         {"separated", separated},
                         {"min_separation", cfg.min_separation},
                         {"passed", pass}};
  if (s.json()) {
    summary["reports"] = reports;
    s.artifacts.emit("liyorke.json", dump(summary));
  } else {
    std::ostringstream os;
    os << "pairs " << pairs << ", proximal " << proximal << ", separated " << separated << " (need "
       << cfg.min_separation << ")\n";
    os << (pass ? "PASS" : "FAIL") << "\n";
    s.artifacts.emit("liyorke.txt", os.str());
  }
  return pass ? ok : property_failed;
}

inline int cmd_proximal(Session& s)
{
  const auto& cfg = s.cfg;
  s.check_spine(cfg.spine);
  if (cfg.level > cfg.spine)
    throw UsageError("--level must not exceed --spine");
  const BigInt length = cfg.window_length.empty() ? BigInt(s.tower().cycle_length(cfg.level, 1) + 5)
                                                  : parse_big(cfg.window_length, "--window-length");
  std::vector<std::pair<BigInt, BigInt>> windows;
  for (std::size_t w = 0; w < cfg.windows; ++w)
    windows.emplace_back(length * w, length);
  std::vector<PointHandle> corpus;
  if (cfg.count > 0 && cfg.cycle != 0 && cfg.pos == "random")
    corpus = sample_handles(s.tower(), cfg.spine, length * cfg.windows, cfg.seed, cfg.count);
  else
    corpus.push_back(s.handle_a());
  std::size_t hits = 0, total = 0;
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream os;
  for (const auto& h : corpus) {
    nlohmann::json found = nlohmann::json::array();
    for (const auto& hit : proximal_certificate(s.tower(), h, cfg.level, windows)) {
      ++total;
      hits += hit.first_hit.has_value();
      found.push_back(hit.first_hit ? nlohmann::json(to_decimal(*hit.first_hit)) : nlohmann::json(nullptr));
    }
    rows.push_back({{"handle", to_json(h)}, {"first_hits", found}});
    if (corpus.size() == 1) {
      for (const auto& f : found)
        os << (f.is_null() ? "none" : f.get<std::string>()) << "\n";
    }
  }
  os << hits << "/" << total << " windows hit the base at level " << cfg.level << "\n";
  if (s.json())
    s.artifacts.emit("proximal.json", dump({{"level", cfg.level},
                                            {"window_length", to_decimal(length)},
                                            {"seed", cfg.seed},
                                            {"hits", hits},
                                            {"windows", total},
                                            {"handles", rows}}));
  else
    s.artifacts.emit("proximal.txt", os.str());
  return hits == total ? ok : property_failed;
}

inline int cmd_mixing(Session& s)
{
  const auto& cfg = s.cfg;
  s.require_level(cfg.m + cfg.j);
  const auto rep = mixing_gap_report(s.tower(), cfg.m, cfg.j, s.scan_budget);
  if (s.json()) {
    s.artifacts.emit("mixing.json", dump(to_json(rep)));
  } else {
    std::ostringstream os;
    os << "copies of c_" << cfg.m << ",1 in the image of c_" << cfg.m + cfg.j << ",1: "
       << to_decimal(rep.occurrences.copy_count) << "\n";
    os << "gaps:";
    std::size_t shown = 0;
    for (const auto& g : rep.gap_set()) {
      if (++shown > 40) {
        os << " ...";
        break;
      }
      os << " " << to_decimal(g);
    }
    os << "\nmissing from [0, " << to_decimal(rep.k_bound) << "]:";
    for (const auto& g : rep.missing_gaps)
      os << " " << to_decimal(g);
    os << "\nprefix " << (rep.prefix_ok ? "confirmed" : "NOT confirmed") << " (" << cfg.j << " base edges)\n";
    os << "trailing gap " << to_decimal(rep.occurrences.suffix.edges) << " <= " << to_decimal(rep.suffix_bound) << ": "
       << (rep.suffix_ok ? "yes" : "no") << "\n";
    s.artifacts.emit("mixing.txt", os.str());
  }
  return rep.prefix_ok && rep.suffix_ok ? ok : property_failed;
}

inline int cmd_degree(Session& s)
{
  const auto& cfg = s.cfg;
  const PointHandle h = s.handle_a();
  const std::size_t depth = std::min(cfg.obs, cfg.spine);
  const auto column = column_of(s.tower(), h, depth);
  nlohmann::json per_level = nlohmann::json::array();
  for (const auto& a : column)
    per_level.push_back(to_json(DegreeValue::of(a)));
  nlohmann::json out{{"handle", to_json(h)}, {"depth", depth}, {"degree", to_json(degree_of_column(s.tower(), h, depth))},
                     {"per_level", per_level}};
  if (!cfg.window.empty()) {
    const BigInt w = parse_big(cfg.window, "--window");
    out["window"] = {{"level", cfg.level},
                     {"length", to_decimal(w)},
                     {"min_degree", to_json(degree_window_min(s.tower(), h, cfg.level, 0, w))}};
  }
  if (s.json()) {
    s.artifacts.emit("degree.json", dump(out));
  } else {
    std::ostringstream os;
    os << "degree (depth " << depth << "): " << to_string(degree_of_column(s.tower(), h, depth)) << "\n";
    for (std::size_t n = 0; n < column.size(); ++n)
      os << "  level " << n << ": " << to_string(column[n]) << "\n";
    if (out.contains("window"))
      os << "window min at level " << cfg.level << ": " << out["window"]["min_degree"].dump() << "\n";
    s.artifacts.emit("degree.txt", os.str());
  }
  return ok;
}

inline int cmd_lift(Session& s)
{
  const auto& cfg = s.cfg;
  s.require_level(cfg.level + 1);
  const VertexAddr a = cfg.cycle == 0 ? VertexAddr::base(cfg.level)
                                      : VertexAddr::on_cycle(cfg.level, cfg.cycle, parse_big(cfg.pos, "--pos"));
  const auto lift = lift_choices(s.tower(), a, cfg.max_results);
  if (s.json()) {
    nlohmann::json addrs = nlohmann::json::array();
    for (const auto& b : lift.addresses)
      addrs.push_back(to_json(b));
    s.artifacts.emit("lift.json", dump({{"address", to_json(a)}, {"total", to_decimal(lift.total)}, {"lifts", addrs}}));
  } else {
    std::ostringstream os;
    os << to_decimal(lift.total) << " preimages of " << to_string(a) << "\n";
    for (const auto& b : lift.addresses)
      os << "  " << to_string(b) << "\n";
    s.artifacts.emit("lift.txt", os.str());
  }
  return ok;
}

inline int cmd_dsl_check(Session& s)
{
  const auto& cfg = s.cfg;
  std::ifstream f(cfg.file);
  if (!f)
    throw UsageError("cannot read " + cfg.file);
  std::stringstream text;
  text << f.rdbuf();
  dsl::CoverDocument doc;
  try {
    doc = dsl::parse(text.str());
  } catch (const dsl::DslError& e) {
    s.err << cfg.file << ": " << e.what() << "\n";
    return property_failed;
  }
  const auto violations = dsl::validate_document(doc);
  const bool round_trip = dsl::parse(dsl::serialize(doc)) == doc;
  std::optional<bool> builtin;
  if (violations.empty() && doc.mode == dsl::Mode::Bouquet && doc.name == "builtin")
    builtin = dsl::builtin_equivalence(doc, doc.levels.size());
  nlohmann::json report{{"file", cfg.file},
                        {"name", doc.name},
                        {"mode", doc.mode == dsl::Mode::Bouquet ? "bouquet" : "materialized"},
                        {"levels", doc.levels.size()},
                        {"round_trip", round_trip}};
  nlohmann::json list = nlohmann::json::array();
  for (const auto& v : violations)
    list.push_back(dsl::describe(v));
  report["violations"] = list;
  if (builtin)
    report["matches_builtin"] = *builtin;
  if (s.json()) {
    s.artifacts.emit("dsl-check.json", dump(report));
  } else {
    std::ostringstream os;
    os << cfg.file << ": " << doc.levels.size() << " levels, " << violations.size() << " violations\n";
    for (const auto& v : violations)
      os << "  " << dsl::describe(v) << "\n";
    if (builtin)
      os << "matches the built-in construction: " << (*builtin ? "yes" : "no") << "\n";
    s.artifacts.emit("dsl-check.txt", os.str());
  }
  return violations.empty() && round_trip && builtin.value_or(true) ? ok : property_failed;
}

inline int cmd_verify(Session& s)
{
  const auto& cfg = s.cfg;
  if (!cfg.all && !cfg.criterion)
    throw UsageError("verify needs --criterion N or --all");
  verify::Options options;
  options.seed = cfg.seed;
  options.scan_budget = s.scan_budget;
  options.vertex_budget = s.vertex_budget;
  options.li_yorke_horizon = parse_big(cfg.horizon, "--horizon");
  options.min_separation_rate = cfg.min_separation;
  verify::Workbench wb(options);
  std::vector<int> ids;
  if (cfg.all) {
    for (int i = 1; i <= verify::check_count; ++i)
      ids.push_back(i);
  } else {
    if (*cfg.criterion < 1 || *cfg.criterion > verify::check_count)
      throw UsageError("--criterion must be between 1 and " + std::to_string(verify::check_count));
    ids.push_back(*cfg.criterion);
  }
  bool all_passed = true;
  nlohmann::json results = nlohmann::json::array();
  std::ostringstream os;
  for (int id : ids) {
    const auto r = verify::run_check(id, wb);
    all_passed = all_passed && r.passed;
    results.push_back(verify::to_json(r));
    os << (r.passed ? "PASS" : "FAIL") << " [" << id << "] " << r.title << "\n";
    for (const auto& n : r.notes)
      os << "    " << n << "\n";
  }
  s.artifacts.emit(s.json() ? "verify.json" : "verify.txt", s.json() ? dump(results) : os.str());
  return all_passed ? ok : property_failed;
}

} // namespace detail

/// Parses and runs one command line. args[0] is the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  RunConfig cfg;
  CLI::App app{"Orbits, covers and chaos checks for an inverse limit of bouquet graph covers", "chaoscope"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--seed", cfg.seed, "Master seed for every random choice");
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "json", "jsonl", "csv", "dot"}));
  app.add_option("--out", cfg.out_dir, "Write artifacts and manifest.json into this directory");
  app.add_option("--cover", cfg.cover_path, "Use a bouquet .cover file instead of the built-in construction");
  app.add_option("--budget", cfg.scan_budget, "Scan budget in path edges (also CHAOSCOPE_BUDGET)");
  app.add_option("--vertex-budget", cfg.vertex_budget, "Largest graph to materialize");
  app.add_flag("--force", cfg.force, "Allow spine levels above 20");

  auto handle_opts = [&](CLI::App* sub) {
    sub->add_option("--spine", cfg.spine, "Spine level M");
    sub->add_option("--cycle", cfg.cycle, "Spine cycle index (0 = fixed point)");
    sub->add_option("--pos", cfg.pos, "Position on the spine cycle");
    sub->add_option("--time", cfg.time, "Steps applied before reporting");
  };

  auto* levels = app.add_subcommand("levels", "Cycle lengths and k values");
  levels->add_option("--max", cfg.max_level, "Highest level");

  auto* validate = app.add_subcommand("validate", "Check the bd-cover axioms on materialized levels");
  validate->add_option("--max", cfg.max_level, "Highest level to materialize");

  auto* materialize = app.add_subcommand("materialize", "Build one level explicitly");
  materialize->add_option("--level", cfg.level, "Level")->required();
  materialize->add_flag_callback("--dot", [&] { cfg.format = "dot"; }, "Graphviz output");
  materialize->add_flag_callback("--json", [&] { cfg.format = "json"; }, "JSON statistics");

  auto* orbit = app.add_subcommand("orbit", "Trace the columns of an orbit");
  handle_opts(orbit);
  orbit->add_option("--obs", cfg.obs, "Observed depth");
  orbit->add_option("--horizon", cfg.horizon, "Number of steps");

  auto* dist = app.add_subcommand("distance", "Distance between two handles on the same spine");
  handle_opts(dist);
  dist->add_option("--cycle-b", cfg.cycle_b, "Second handle's cycle");
  dist->add_option("--pos-b", cfg.pos_b, "Second handle's position");
  dist->add_option("--time-b", cfg.time_b, "Second handle's time");

  auto* liyorke = app.add_subcommand("liyorke", "Search random pairs for proximal and separation witnesses");
  liyorke->add_option("--pairs", cfg.pairs, "Number of distinct pairs");
  liyorke->add_option("--spine", cfg.spine, "Spine level");
  liyorke->add_option("--horizon", cfg.horizon, "Steps scanned per pair");
  liyorke->add_option("--prox-level", cfg.prox_level, "Levels that must agree for a proximal witness");
  liyorke->add_option("--sep-level", cfg.sep_level, "Deepest level allowed for a separation witness");
  liyorke->add_option("--min-separation", cfg.min_separation, "Required fraction of separated pairs");

  auto* proximal = app.add_subcommand("proximal", "First base visits in consecutive windows");
  handle_opts(proximal);
  proximal->add_option("--level", cfg.level, "Target level m");
  proximal->add_option("--windows", cfg.windows, "Number of windows");
  proximal->add_option("--window-length", cfg.window_length, "Window length (default |c_{m,1}| + 5)");
  proximal->add_option("--count", cfg.count, "Random handles when --pos random");

  auto* mixing = app.add_subcommand("mixing-gaps", "Gaps between copies of c_{m,1} in the image of c_{m+j,1}");
  mixing->add_option("--m", cfg.m, "Lower level")->check(CLI::PositiveNumber);
  mixing->add_option("--j", cfg.j, "Levels above m")->check(CLI::PositiveNumber);

  auto* degree = app.add_subcommand("degree", "Depth-limited degree of a handle");
  handle_opts(degree);
  degree->add_option("--obs", cfg.obs, "Depth");
  degree->add_option("--window", cfg.window, "Also report the minimum degree over this many steps");
  degree->add_option("--level", cfg.level, "Level watched by --window");

  auto* lift = app.add_subcommand("lift", "Preimages of an address one level up");
  lift->add_option("--level", cfg.level, "Level of the address");
  lift->add_option("--cycle", cfg.cycle, "Cycle (0 = base)");
  lift->add_option("--pos", cfg.pos, "Position");
  lift->add_option("--max", cfg.max_results, "How many preimages to list");

  auto* dsl_check = app.add_subcommand("dsl-check", "Parse and validate a .cover file");
  dsl_check->add_option("file", cfg.file, "Path")->required();

  auto* verify_cmd = app.add_subcommand("verify", "Run acceptance checks");
  verify_cmd->add_option("--criterion", cfg.criterion, "Check number 1-11");
  verify_cmd->add_flag("--all", cfg.all, "Run every check");
  verify_cmd->add_option("--horizon", cfg.horizon, "Li-Yorke horizon for check 9")->default_str("10000");
  verify_cmd->add_option("--min-separation", cfg.min_separation, "Separation rate for check 9");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  }
  if (verify_cmd->parsed() && verify_cmd->count("--horizon") == 0)
    cfg.horizon = "10000";
  if (liyorke->parsed() && liyorke->count("--horizon") == 0)
    cfg.horizon = "10000";
  if (liyorke->parsed() && liyorke->count("--spine") == 0)
    cfg.spine = 8;

  int status = usage_error;
  try {
    cfg.command = app.get_subcommands().front()->get_name();
    detail::Session session(cfg, out, err);
    const std::string& c = cfg.command;
    if (c == "levels")
      status = detail::cmd_levels(session);
    else if (c == "validate")
      status = detail::cmd_validate(session);
    else if (c == "materialize")
      status = detail::cmd_materialize(session);
    else if (c == "orbit")
      status = detail::cmd_orbit(session);
    else if (c == "distance")
      status = detail::cmd_distance(session);
    else if (c == "liyorke")
      status = detail::cmd_liyorke(session);
    else if (c == "proximal")
      status = detail::cmd_proximal(session);
    else if (c == "mixing-gaps")
      status = detail::cmd_mixing(session);
    else if (c == "degree")
      status = detail::cmd_degree(session);
    else if (c == "lift")
      status = detail::cmd_lift(session);
    else if (c == "dsl-check")
      status = detail::cmd_dsl_check(session);
    else if (c == "verify")
      status = detail::cmd_verify(session);
    session.artifacts.finish(session.parameters(), status);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const SpineExhausted& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  }
  return status;
}

} // namespace chaoscope::cli
