// opaq — execution-time opacity analysis for one-clock parametric timed
// automata.
//
// Commands:
//   validate <m>                                  parse + static checks
//   pet <m> [--method ...] [--emit-expr] [--dot f] parametric execution times
//   synth <m> --problem eos|fos|d-eos|d-fos       opacity synthesis
//   check <m> --valuation .. --mode exist|full    per-valuation decision
//   bounded <m> --problem foe|eoe --pmax N        grid emptiness search
//   oracle <m> --valuation .. --bound T           concrete-semantics ground truth
//   export <m> --smt f [--lpsl f] [--div f]       solver / artifact exports
//
// Reports are JSON objects {problem, status, result[, detail][, timings]} on
// stdout; --pretty switches to a human-readable rendering with constraints
// printed as inequalities. Without --timings, identical invocations produce
// byte-identical output.
//
// Exit codes: 0 success, 1 analysis failure (unparsable or unsupported
// model, exploration errors), 2 usage errors (bad flags, missing files).

#include <CLI11.hpp>
#include <json.hpp>

#include <opaq/arith.hpp>
#include <opaq/geometry.hpp>
#include <opaq/model.hpp>
#include <opaq/opacity.hpp>
#include <opaq/oracle.hpp>
#include <opaq/pet.hpp>
#include <opaq/rational.hpp>
#include <opaq/zonegraph.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using opaq::Rational;
namespace geo = opaq::geo;
namespace model = opaq::model;
namespace zg = opaq::zonegraph;
namespace pet = opaq::pet;
namespace arith = opaq::arith;
namespace opacity = opaq::opacity;
namespace oracle = opaq::oracle;

// Bad command lines and unreadable paths exit 2; models that parse but
// cannot be analyzed exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write file: " + path);
  out << text;
}

json rational_json(const Rational& r) {
  if (opaq::rat_is_integer(r) && r >= -1000000000 && r <= 1000000000)
    return json(opaq::rat_to_long(r));
  return json(opaq::rat_to_string(r));
}

json polyset_json(const geo::PolySet& ps) {
  return json::parse(geo::polyset_to_json(ps));
}

json valuation_json(const std::map<std::string, Rational>& v) {
  json out = json::object();
  for (const auto& [name, value] : v) out[name] = rational_json(value);
  return out;
}

std::string valuation_text(const std::map<std::string, Rational>& v) {
  std::string out;
  for (const auto& [name, value] : v) {
    if (!out.empty()) out += ", ";
    out += name + " = " + opaq::rat_to_string(value);
  }
  return out.empty() ? "(none)" : out;
}

long parse_env_long(const char* name, long fallback) {
  const char* raw = std::getenv(name);
  if (raw == nullptr || *raw == '\0') return fallback;
  char* end = nullptr;
  long value = std::strtol(raw, &end, 10);
  if (end == nullptr || *end != '\0' || value <= 0)
    throw UsageError(std::string(name) + " must be a positive integer, got '" +
                     raw + "'");
  return value;
}

// ---------------------------------------------------------------------------
// Shared option state.

struct Options {
  std::string model_path;
  bool pretty = false;
  bool timings = false;
  long max_states = 0;  // 0 = resolve from env / defaults
  long max_depth = 0;

  std::string method = "auto";
  bool emit_expr = false;
  std::string dot_path;

  std::string problem;
  std::string valuation;
  std::string mode;
  long pmax = 0;
  int jobs = 1;
  long bound = 0;
  bool csv = false;

  std::string smt_path;
  std::string lpsl_path;
  std::string div_path;
};

zg::ExplorationBudget resolve_budget(const Options& opt) {
  zg::ExplorationBudget defaults;
  zg::ExplorationBudget budget;
  budget.max_states = parse_env_long("OPAQ_MAX_STATES", defaults.max_states);
  budget.max_depth = parse_env_long("OPAQ_MAX_DEPTH", defaults.max_depth);
  if (opt.max_states > 0) budget.max_states = opt.max_states;
  if (opt.max_depth > 0) budget.max_depth = opt.max_depth;
  return budget;
}

model::PTA load_model(const Options& opt) {
  return model::parse_model(read_file(opt.model_path));
}

// Every model parameter present exactly once; no stray names.
std::map<std::string, Rational> resolve_valuation(const model::PTA& pta,
                                                  const Options& opt) {
  if (opt.valuation.empty()) {
    if (!pta.params.empty())
      throw UsageError("--valuation is required: model has parameters " +
                       [&] {
                         std::string s;
                         for (const auto& p : pta.params)
                           s += (s.empty() ? "" : ", ") + p;
                         return s;
                       }());
    return {};
  }
  std::map<std::string, Rational> v;
  try {
    v = model::parse_valuation(opt.valuation);
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad --valuation: ") + e.what());
  }
  for (const auto& [name, value] : v) {
    (void)value;
    if (!pta.is_param(name))
      throw UsageError("--valuation names unknown parameter '" + name + "'");
  }
  for (const auto& p : pta.params)
    if (v.find(p) == v.end())
      throw UsageError("--valuation misses parameter '" + p + "'");
  return v;
}

// ---------------------------------------------------------------------------
// Reporting.

struct Report {
  std::string problem;
  std::string status = "complete";
  json result;
  std::optional<json> detail;
  std::vector<std::string> pretty_lines;
  std::string raw;  // when set, replaces every other output form (CSV)
};

int emit(const Report& report, const Options& opt, long long elapsed_ms) {
  if (!report.raw.empty()) {
    std::cout << report.raw;
    return 0;
  }
  if (opt.pretty) {
    for (const auto& line : report.pretty_lines) std::cout << line << "\n";
    if (report.pretty_lines.empty())
      std::cout << report.result.dump() << "\n";
    if (opt.timings)
      std::cout << "elapsed: " << elapsed_ms << " ms\n";
    return 0;
  }
  json out;
  out["problem"] = report.problem;
  out["status"] = report.status;
  out["result"] = report.result;
  if (report.detail) out["detail"] = *report.detail;
  if (opt.timings) out["timings"] = json{{"total_ms", elapsed_ms}};
  std::cout << out.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Commands.

Report run_validate(const Options& opt) {
  model::PTA pta = load_model(opt);
  model::Diagnostics diag = model::validate(pta);
  Report r;
  r.problem = "validate";
  r.result = json{{"valid", true},
                  {"name", pta.name},
                  {"clocks", pta.clocks},
                  {"params", pta.params},
                  {"locations", pta.locations.size()},
                  {"edges", pta.edges.size()},
                  {"reset_free", diag.reset_free},
                  {"exact_pet_available", diag.exact_pet_available},
                  {"warnings", diag.warnings}};
  r.pretty_lines.push_back("model " + pta.name + ": OK");
  {
    std::string line = "clocks:";
    for (const auto& c : pta.clocks) line += " " + c;
    r.pretty_lines.push_back(line);
    line = "params:";
    for (const auto& p : pta.params) line += " " + p;
    r.pretty_lines.push_back(line);
  }
  r.pretty_lines.push_back("locations: " + std::to_string(pta.locations.size()) +
                           ", edges: " + std::to_string(pta.edges.size()));
  r.pretty_lines.push_back(std::string("exact single-clock analysis: ") +
                           (diag.exact_pet_available ? "available" : "unavailable"));
  for (const auto& w : diag.warnings) r.pretty_lines.push_back("warning: " + w);
  return r;
}

Report run_pet(const Options& opt) {
  model::PTA pta = load_model(opt);
  zg::ExplorationBudget budget = resolve_budget(opt);
  bool zones = opt.method == "zones" ||
               (opt.method == "auto" && pta.clocks.size() == 1);
  if ((opt.emit_expr || !opt.dot_path.empty()) && !zones)
    throw UsageError("--emit-expr and --dot require the zones method");

  Report r;
  r.problem = "pet";
  std::vector<std::string> vars = pta.params;
  vars.push_back(model::kDurationParam);

  if (!zones) {
    pet::PetResult res = pet::pet_semialg(pta, budget);
    r.status = zg::status_to_string(res.status);
    r.result = json{{"method", "semialg"}, {"vars", vars},
                    {"set", polyset_json(res.set)}};
    r.pretty_lines.push_back("PET over {" + [&] {
      std::string s;
      for (const auto& v : vars) s += (s.empty() ? "" : ", ") + v;
      return s;
    }() + "} [" + r.status + "]:");
    r.pretty_lines.push_back("  " + geo::pretty_polyset(res.set));
    return r;
  }

  pet::PetExpression pe = pet::pet_via_zones(pta, budget);
  r.status = zg::status_to_string(pe.status);
  json terms = json::parse(pet::terms_to_json(pe.terms));
  r.result = json{{"method", "zones"}, {"vars", pe.vars}, {"terms", terms}};
  if (opt.emit_expr) r.result["expr"] = pet::ze_to_string(pe.expr);
  if (!opt.dot_path.empty()) {
    write_file(opt.dot_path, pet::zone_automaton_dot(pe.automaton));
    r.result["dot"] = opt.dot_path;
  }

  r.pretty_lines.push_back("PET normal form, " +
                           std::to_string(pe.terms.size()) + " term(s) [" +
                           r.status + "]:");
  for (const auto& t : pe.terms) {
    r.pretty_lines.push_back("  base:  " + geo::pretty_polyhedron(t.base));
    for (const auto& l : t.loops)
      r.pretty_lines.push_back("  loop:  " + geo::pretty_polyhedron(l));
  }
  if (opt.emit_expr)
    r.pretty_lines.push_back("expr: " + pet::ze_to_string(pe.expr));
  if (!opt.dot_path.empty())
    r.pretty_lines.push_back("wrote " + opt.dot_path);
  return r;
}

Report run_synth(const Options& opt) {
  model::PTA pta = load_model(opt);
  zg::ExplorationBudget budget = resolve_budget(opt);
  opacity::SynthesisResult res;
  if (opt.problem == "d-eos")
    res = opacity::d_eos(pta, budget);
  else if (opt.problem == "d-fos")
    res = opacity::d_fos(pta, budget);
  else if (opt.problem == "eos")
    res = opacity::eos_synth(pta, budget);
  else
    res = opacity::fos_synth(pta, budget);

  Report r;
  r.problem = opt.problem;
  r.status = zg::status_to_string(res.status);
  r.result = polyset_json(res.set);
  r.pretty_lines.push_back(opt.problem + " [" + r.status + "]:");
  r.pretty_lines.push_back("  " + geo::pretty_polyset(res.set));
  return r;
}

Report run_check(const Options& opt) {
  model::PTA pta = load_model(opt);
  zg::ExplorationBudget budget = resolve_budget(opt);
  std::map<std::string, Rational> v = resolve_valuation(pta, opt);
  opacity::Mode mode =
      opt.mode == "full" ? opacity::Mode::Full : opacity::Mode::Exist;
  opacity::Method method = opacity::Method::Auto;
  if (opt.method == "zones") method = opacity::Method::Zones;
  if (opt.method == "semialg") method = opacity::Method::Semialg;

  opacity::CheckResult res = opacity::check_valuation(pta, v, mode, method, budget);

  Report r;
  r.problem = "check";
  r.status = zg::status_to_string(res.status);
  r.result = res.opaque;
  json detail =
      json{{"mode", opt.mode}, {"method", res.method},
           {"conclusive", res.conclusive}, {"valuation", valuation_json(v)}};
  if (res.witness) detail["witness"] = rational_json(*res.witness);
  if (res.least_public_only)
    detail["least_public_only"] = rational_json(*res.least_public_only);
  if (res.least_private_only)
    detail["least_private_only"] = rational_json(*res.least_private_only);
  r.detail = detail;

  std::string verdict =
      (mode == opacity::Mode::Full ? "fully opaque" : "exist-opaque");
  r.pretty_lines.push_back(verdict + " at " + valuation_text(v) + ": " +
                           (res.opaque ? "true" : "false") + " [" + res.method +
                           (res.conclusive ? ", conclusive" : ", inconclusive") +
                           "]");
  if (res.witness)
    r.pretty_lines.push_back("opaque duration witness: d = " +
                             opaq::rat_to_string(*res.witness));
  if (res.least_public_only)
    r.pretty_lines.push_back("least public-only duration: d = " +
                             opaq::rat_to_string(*res.least_public_only));
  if (res.least_private_only)
    r.pretty_lines.push_back("least private-only duration: d = " +
                             opaq::rat_to_string(*res.least_private_only));
  return r;
}

Report run_bounded(const Options& opt) {
  model::PTA pta = load_model(opt);
  zg::ExplorationBudget budget = resolve_budget(opt);
  bool full = opt.problem == "foe";
  opacity::BoundedSearch res =
      full ? opacity::foe_bounded(pta, opt.pmax, opt.jobs, budget)
           : opacity::eoe_bounded(pta, opt.pmax, opt.jobs, budget);

  Report r;
  r.problem = opt.problem;
  r.status = zg::status_to_string(res.status);
  std::string verdict = res.found ? "non-empty" : "empty up to pmax";
  r.result = json{{"verdict", verdict},
                  {"witness", res.found ? valuation_json(res.witness) : json()},
                  {"bound", res.bound}};

  // For one-parameter full-opacity searches the duration sets stabilize in
  // shape beyond a computable parameter threshold; report it so callers know
  // from which valuation on the bounded sweep is pure extrapolation.
  if (full && pta.params.size() == 1) {
    try {
      model::PTA doubled = model::double_system(pta);
      pet::PetExpression priv =
          pet::pet_via_zones(model::build_private_projection(doubled), budget);
      pet::PetExpression pub =
          pet::pet_via_zones(model::build_public_projection(doubled), budget);
      long m = std::max(arith::to_lpsl(priv.terms, pta.params[0]).threshold,
                        arith::to_lpsl(pub.terms, pta.params[0]).threshold);
      // Thresholds are computed on the doubled system; valuations are doubled
      // with it, so the original-scale threshold is the halved ceiling.
      r.result["threshold_M"] = (m + 1) / 2;
    } catch (const std::exception&) {
      // Multi-clock or otherwise out of the exact fragment: omit.
    }
  }

  r.pretty_lines.push_back(opt.problem + " on [0," + std::to_string(opt.pmax) +
                           "]^" + std::to_string(pta.params.size()) + ": " +
                           verdict);
  if (res.found)
    r.pretty_lines.push_back("witness valuation: " + valuation_text(res.witness));
  if (r.result.contains("threshold_M"))
    r.pretty_lines.push_back(
        "shape threshold M = " + r.result["threshold_M"].dump() +
        " (sets uniform for parameter values >= M)");
  return r;
}

Report run_oracle(const Options& opt) {
  model::PTA pta = load_model(opt);
  std::map<std::string, Rational> v = resolve_valuation(pta, opt);
  model::PTA ground = v.empty() ? pta : model::substitute(pta, v);
  oracle::ConcreteOpacity table = oracle::check_opacity_concrete(ground, opt.bound);
  oracle::DurationSets sets = oracle::enumerate_durations(ground, opt.bound);

  Report r;
  r.problem = "oracle";
  r.result = json{{"horizon", table.horizon},
                  {"private", sets.private_durations},
                  {"public", sets.public_durations},
                  {"both", table.both},
                  {"private_only", table.private_only},
                  {"public_only", table.public_only},
                  {"exist_opaque", table.exist_opaque},
                  {"fully_opaque", table.fully_opaque}};

  if (opt.csv) {
    // CSV replaces the JSON report as the machine output.
    r.raw = oracle::to_csv(table);
    return r;
  }

  auto set_text = [](const std::set<long>& s) {
    std::string out = "{";
    for (long n : s) out += (out.size() == 1 ? "" : ", ") + std::to_string(n);
    return out + "}";
  };
  r.pretty_lines.push_back("concrete durations up to " +
                           std::to_string(table.horizon) + " at " +
                           valuation_text(v));
  r.pretty_lines.push_back("private: " + set_text(sets.private_durations));
  r.pretty_lines.push_back("public:  " + set_text(sets.public_durations));
  r.pretty_lines.push_back(std::string("exist-opaque: ") +
                           (table.exist_opaque ? "true" : "false") +
                           "; fully opaque: " +
                           (table.fully_opaque ? "true" : "false"));
  return r;
}

Report run_export(const Options& opt) {
  if (opt.smt_path.empty() && opt.lpsl_path.empty() && opt.div_path.empty())
    throw UsageError("export requires at least one of --smt, --lpsl, --div");
  model::PTA pta = load_model(opt);
  zg::ExplorationBudget budget = resolve_budget(opt);

  // All exports are built on the doubled system: constants scaled by 2 and
  // strict comparisons widened so that every constraint is non-strict and
  // integer durations decide the dense-time questions. Durations and
  // parameters in the emitted artifacts are in that doubled scale.
  model::PTA doubled = model::double_system(pta);

  Report r;
  r.problem = "export";
  std::vector<std::string> written;

  if (!opt.smt_path.empty()) {
    pet::PetExpression priv =
        pet::pet_via_zones(model::build_private_projection(doubled), budget);
    pet::PetExpression pub =
        pet::pet_via_zones(model::build_public_projection(doubled), budget);
    arith::DivSystem sys_priv = arith::build_div_formula(priv.terms, pta.params);
    arith::DivSystem sys_pub = arith::build_div_formula(pub.terms, pta.params);
    std::string script = arith::emit_smt_intersection(
        sys_priv, sys_pub,
        "exist-opacity emptiness for " + pta.name +
            ": some duration d is both a private and a public execution time."
            " All constants doubled; integer solutions decide the dense"
            " problem.");
    write_file(opt.smt_path, script);
    written.push_back(opt.smt_path);
  }

  if (!opt.lpsl_path.empty() || !opt.div_path.empty()) {
    pet::PetExpression full = pet::pet_via_zones(doubled, budget);
    if (!opt.lpsl_path.empty()) {
      if (pta.params.size() != 1)
        throw UsageError("--lpsl requires a model with exactly one parameter");
      arith::LpSlSet lpsl = arith::to_lpsl(full.terms, pta.params[0]);
      write_file(opt.lpsl_path, arith::lpsl_to_json(lpsl));
      written.push_back(opt.lpsl_path);
    }
    if (!opt.div_path.empty()) {
      arith::DivSystem sys = arith::build_div_formula(full.terms, pta.params);
      write_file(opt.div_path, arith::div_formula_to_string(sys) + "\n");
      written.push_back(opt.div_path);
    }
  }

  r.result = json{{"written", written}};
  for (const auto& path : written) r.pretty_lines.push_back("wrote " + path);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "opaq — execution-time opacity analysis for one-clock parametric timed "
      "automata"};
  app.require_subcommand(1);

  Options opt;
  app.add_flag("--pretty", opt.pretty,
               "Human-readable output instead of JSON");
  app.add_flag("--timings", opt.timings,
               "Include wall-clock timings (output no longer byte-stable)");
  app.add_option("--max-states", opt.max_states,
                 "Symbolic exploration state budget (env OPAQ_MAX_STATES)");
  app.add_option("--max-depth", opt.max_depth,
                 "Symbolic exploration depth budget (env OPAQ_MAX_DEPTH)");

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("model", opt.model_path, "Model file (.pta)")->required();
    sub->fallthrough();
  };

  CLI::App* validate = app.add_subcommand("validate", "Parse and check a model");
  add_model(validate);

  CLI::App* petc = app.add_subcommand("pet", "Parametric execution times");
  add_model(petc);
  petc->add_option("--method", opt.method, "auto|semialg|zones")
      ->check(CLI::IsMember({"auto", "semialg", "zones"}));
  petc->add_flag("--emit-expr", opt.emit_expr,
                 "Include the zone regular expression");
  petc->add_option("--dot", opt.dot_path, "Write the zone automaton as DOT");

  CLI::App* synth = app.add_subcommand("synth", "Opacity parameter synthesis");
  add_model(synth);
  synth->add_option("--problem", opt.problem, "eos|fos|d-eos|d-fos")
      ->required()
      ->check(CLI::IsMember({"eos", "fos", "d-eos", "d-fos"}));

  CLI::App* check = app.add_subcommand("check", "Decide opacity at a valuation");
  add_model(check);
  check->add_option("--valuation", opt.valuation, "p1=v1,p2=v2,...")->required();
  check->add_option("--mode", opt.mode, "exist|full")
      ->required()
      ->check(CLI::IsMember({"exist", "full"}));
  check->add_option("--method", opt.method, "auto|semialg|zones")
      ->check(CLI::IsMember({"auto", "semialg", "zones"}));

  CLI::App* bounded =
      app.add_subcommand("bounded", "Grid search for an opaque valuation");
  add_model(bounded);
  bounded->add_option("--problem", opt.problem, "foe|eoe")
      ->required()
      ->check(CLI::IsMember({"foe", "eoe"}));
  bounded->add_option("--pmax", opt.pmax, "Search [0,pmax]^|P|")
      ->required()
      ->check(CLI::NonNegativeNumber);
  bounded->add_option("--jobs", opt.jobs, "Worker threads (default 1)")
      ->check(CLI::PositiveNumber);

  CLI::App* orc = app.add_subcommand("oracle", "Concrete discrete-time oracle");
  add_model(orc);
  orc->add_option("--valuation", opt.valuation, "p1=v1,p2=v2,...");
  orc->add_option("--bound", opt.bound, "Duration horizon T")
      ->required()
      ->check(CLI::NonNegativeNumber);
  orc->add_flag("--csv", opt.csv, "Emit duration,visibility-class CSV");

  CLI::App* exp = app.add_subcommand("export", "Write solver artifacts");
  add_model(exp);
  exp->add_option("--smt", opt.smt_path,
                  "SMT-LIB 2 exist-opacity emptiness query");
  exp->add_option("--lpsl", opt.lpsl_path,
                  "Linear parametric semilinear set JSON (one parameter)");
  exp->add_option("--div", opt.div_path,
                  "Readable divisibility-arithmetic formula");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    std::cerr << "run '" << (argc > 0 ? argv[0] : "opaq")
              << " --help' for a synopsis\n";
    return 2;
  }

  auto started = std::chrono::steady_clock::now();
  try {
    Report report;
    if (app.got_subcommand(validate))
      report = run_validate(opt);
    else if (app.got_subcommand(petc))
      report = run_pet(opt);
    else if (app.got_subcommand(synth))
      report = run_synth(opt);
    else if (app.got_subcommand(check))
      report = run_check(opt);
    else if (app.got_subcommand(bounded))
      report = run_bounded(opt);
    else if (app.got_subcommand(orc))
      report = run_oracle(opt);
    else
      report = run_export(opt);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    return emit(report, opt, elapsed);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    json out;
    out["problem"] = app.get_subcommands().empty()
                         ? "unknown"
                         : app.get_subcommands().front()->get_name();
    out["status"] = "error";
    out["result"] = json{{"error", e.what()}};
    if (!opt.pretty) std::cout << out.dump() << "\n";
    return 1;
  }
}
