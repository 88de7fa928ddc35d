#include "ctlab/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "ctlab/bounds.hpp"
#include "ctlab/budget.hpp"
#include "ctlab/cache.hpp"
#include "ctlab/constructions.hpp"
#include "ctlab/machine.hpp"
#include "ctlab/oracle.hpp"
#include "ctlab/sequence.hpp"

namespace ctlab {

namespace {

using nlohmann::json;

json budget_to_json(ResourceBudget b) {
  json j;
  j["steps"] = b.max_steps == kUnbounded ? json(nullptr) : json(b.max_steps);
  j["cells"] = b.max_cells == kUnbounded ? json(nullptr) : json(b.max_cells);
  return j;
}

json certificate_to_json(const Certificate& c) {
  json j;
  j["value"] = c.value.to_json();
  j["witness"] =
      c.witness ? json(c.witness->to_string()) : json(nullptr);
  j["budget"] = budget_to_json(c.budget_used);
  return j;
}

std::vector<uint64_t> parse_uint_list(const std::string& s,
                                      const std::string& flag) {
  std::vector<uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      size_t pos = 0;
      out.push_back(std::stoull(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(flag + ": expected comma-separated naturals, got '" +
                                  item + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument(flag + ": empty list");
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += "\"\"";
    else q += c;
  }
  q += "\"";
  return q;
}

void flatten_csv(const json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      flatten_csv(v, prefix.empty() ? k : prefix + "." + k, out);
    }
  } else if (j.is_array()) {
    size_t i = 0;
    for (const auto& v : j) {
      flatten_csv(v, prefix + "." + std::to_string(i++), out);
    }
  } else if (j.is_null()) {
    out << csv_escape(prefix) << ",\n";
  } else if (j.is_string()) {
    out << csv_escape(prefix) << "," << csv_escape(j.get<std::string>()) << "\n";
  } else {
    out << csv_escape(prefix) << "," << j.dump() << "\n";
  }
}

struct GlobalArgs {
  std::string t_src;
  std::string s_src;
  uint64_t safety_cap = kDefaultSafetyCap;
  std::string cache_dir;
  int jobs = 1;
  uint64_t seed = 0;
  std::string format = "json";
  std::string out_path;
};

struct Context {
  GlobalArgs g;
  RunCache* cache = nullptr;
  ExperimentReport report;

  std::vector<std::string> replay;  // canonical argv for re-execution

  BudgetPolicy policy() const {
    if (g.t_src.empty() && g.s_src.empty()) {
      throw std::invalid_argument("this verb needs --t-expr or --space-expr");
    }
    BudgetPolicy p;
    if (!g.t_src.empty()) p.step_bound = BoundExpr::parse(g.t_src);
    if (!g.s_src.empty()) p.cell_bound = BoundExpr::parse(g.s_src);
    p.safety_cap = g.safety_cap;
    return p;
  }

  void push_policy_args() {
    if (!g.t_src.empty()) {
      replay.push_back("--t-expr");
      replay.push_back(g.t_src);
    }
    if (!g.s_src.empty()) {
      replay.push_back("--space-expr");
      replay.push_back(g.s_src);
      replay.push_back("--safety-cap");
      replay.push_back(std::to_string(g.safety_cap));
    }
  }

  void finish_echo(const std::string& verb, json params) {
    json& e = report.echo;
    e["tool"] = kToolName;
    e["version"] = kToolVersion;
    e["verb"] = verb;
    e["params"] = std::move(params);
    e["seed"] = g.seed;
    if (!g.t_src.empty()) e["t_expr"] = g.t_src;
    if (!g.s_src.empty()) {
      e["space_expr"] = g.s_src;
      e["safety_cap"] = g.safety_cap;
    }
    replay.push_back("--seed");
    replay.push_back(std::to_string(g.seed));
    e["replay_argv"] = replay;
  }
};

// ---- verb handlers ---------------------------------------------------

void verb_run(Context& ctx, const std::string& p_str, const std::string& y_str,
              std::optional<uint64_t> steps, std::optional<uint64_t> cells,
              bool trace) {
  const Program p = BitString::from_string(p_str);
  const BitString y = BitString::from_string(y_str);
  ResourceBudget budget;
  budget.max_steps = steps.value_or(ctx.g.safety_cap);
  budget.max_cells = cells.value_or(kUnbounded);

  json results;
  if (trace) {
    std::ostringstream lines;
    const ExecResult r = run_traced(p, y, budget, lines);
    results["status"] = r.halted() ? "halted" : "budget_exceeded";
    results["output"] = r.halted() ? json(r.output.to_string()) : json(nullptr);
    results["steps_used"] = r.steps_used;
    results["cells_used"] = r.cells_used;
    json jt = json::array();
    std::string line;
    std::istringstream in(lines.str());
    while (std::getline(in, line)) jt.push_back(line);
    results["trace"] = std::move(jt);
  } else {
    const ExecResult r = run(p, y, budget);
    results["status"] = r.halted() ? "halted" : "budget_exceeded";
    results["output"] = r.halted() ? json(r.output.to_string()) : json(nullptr);
    results["steps_used"] = r.steps_used;
    results["cells_used"] = r.cells_used;
  }
  ctx.report.results = std::move(results);

  ctx.replay = {"run", "--p", p_str, "--y", y_str,
                "--steps", std::to_string(budget.max_steps)};
  if (budget.max_cells != kUnbounded) {
    ctx.replay.push_back("--cells");
    ctx.replay.push_back(std::to_string(budget.max_cells));
  }
  if (trace) ctx.replay.push_back("--trace");
  json params;
  params["p"] = p_str;
  params["y"] = y_str;
  params["budget"] = budget_to_json(budget);
  params["trace"] = trace;
  ctx.finish_echo("run", std::move(params));
}

void verb_ct(Context& ctx, const std::string& x_str, const std::string& y_str) {
  const BitString x = BitString::from_string(x_str);
  const BitString y = BitString::from_string(y_str);
  const BudgetPolicy policy = ctx.policy();
  policy.require_monotone_on(0, x.size());

  const Certificate cert = exact_ct(x, y, policy, ctx.cache, ctx.g.jobs);
  json results;
  results["x"] = x_str;
  results["y"] = y_str;
  results["certificate"] = certificate_to_json(cert);
  results["replays"] = certificate_replays(cert, x, y);
  ctx.report.results = std::move(results);

  ctx.replay = {"ct", "--x", x_str, "--y", y_str};
  ctx.push_policy_args();
  json params;
  params["x"] = x_str;
  params["y"] = y_str;
  ctx.finish_echo("ct", std::move(params));
}

void verb_upperc(Context& ctx, const std::string& x_str,
                 const std::string& y_str, const std::string& schedule_str) {
  const BitString x = BitString::from_string(x_str);
  const BitString y = BitString::from_string(y_str);
  const std::vector<uint64_t> levels = parse_uint_list(schedule_str, "--schedule");

  // In space mode the schedule lists cell budgets (step safety cap applies);
  // otherwise it lists step budgets.
  const bool space = !ctx.g.s_src.empty();
  std::vector<ResourceBudget> schedule;
  for (uint64_t v : levels) {
    schedule.push_back(space ? ResourceBudget::of(ctx.g.safety_cap, v)
                             : ResourceBudget::steps(v));
  }

  const UpperOutcome out = upper_c(x, y, schedule, ctx.cache, ctx.g.jobs);
  json results;
  results["x"] = x_str;
  results["y"] = y_str;
  results["kind"] = "upper_bound";
  results["best"] = certificate_to_json(out.best);
  json stages = json::array();
  for (const auto& [budget, value] : out.stages) {
    stages.push_back({{"budget", budget_to_json(budget)},
                      {"value", value.to_json()}});
  }
  results["stages"] = std::move(stages);
  ctx.report.results = std::move(results);

  ctx.replay = {"upperc", "--x", x_str, "--y", y_str, "--schedule", schedule_str};
  if (space) {
    ctx.replay.push_back("--space-expr");
    ctx.replay.push_back(ctx.g.s_src);
    ctx.replay.push_back("--safety-cap");
    ctx.replay.push_back(std::to_string(ctx.g.safety_cap));
  }
  json params;
  params["x"] = x_str;
  params["y"] = y_str;
  params["schedule"] = levels;
  params["space_schedule"] = space;
  ctx.finish_echo("upperc", std::move(params));
}

void verb_census(Context& ctx, uint64_t n, const std::string& k1_str) {
  const std::vector<uint64_t> k1_set = parse_uint_list(k1_str, "--k1");
  const BudgetPolicy policy = ctx.policy();
  policy.require_monotone_on(0, n);

  const CensusTable table = census(n, policy, k1_set, ctx.cache, ctx.g.jobs);
  ctx.report.results = table.to_json();

  ctx.replay = {"census", "--n", std::to_string(n), "--k1", k1_str};
  ctx.push_policy_args();
  json params;
  params["n"] = n;
  params["k1_set"] = k1_set;
  ctx.finish_echo("census", std::move(params));
}

void diag_results(Context& ctx, const DiagResult& res, json params,
                  std::vector<std::string> replay, const std::string& verb,
                  uint64_t n, uint64_t m) {
  json results = std::move(params);
  results["bottom"] = res.bottom();
  results["outcome"] =
      res.bottom() ? json(nullptr) : json(res.outcome->to_string());
  results["forbidden_size"] = res.forbidden_size;
  results["candidates_remaining"] = res.candidates_remaining;
  results["cutoff"] = res.cutoff;
  // |m| in the pairing: the analysis in the source material tracks this
  // description length rather than enforcing a cap on m.
  results["m_code_len"] = nat_to_string(m).size();
  ctx.report.results = results;

  ctx.replay = std::move(replay);
  ctx.push_policy_args();
  json echo_params;
  echo_params["n"] = n;
  echo_params["m"] = m;
  ctx.finish_echo(verb, std::move(echo_params));
}

void verb_diag(Context& ctx, uint64_t n, uint64_t k1, uint64_t m) {
  const BudgetPolicy policy = ctx.policy();
  policy.require_monotone_on(0, n);
  const DiagResult res = algorithm_a(policy, n, k1, m, ctx.cache, ctx.g.jobs);
  json params;
  params["k1"] = k1;
  diag_results(ctx, res, std::move(params),
               {"diag", "--n", std::to_string(n), "--k1", std::to_string(k1),
                "--m", std::to_string(m)},
               "diag", n, m);
}

void verb_diag_general(Context& ctx, uint64_t n, const std::string& g_src,
                       uint64_t m) {
  const BudgetPolicy policy = ctx.policy();
  policy.require_monotone_on(0, n);
  const BoundExpr g = BoundExpr::parse(g_src);
  const DiagResult res =
      algorithm_a_general(policy, n, g, m, ctx.cache, ctx.g.jobs);
  json params;
  params["g"] = g_src;
  diag_results(ctx, res, std::move(params),
               {"diag-general", "--n", std::to_string(n), "--g-expr", g_src,
                "--m", std::to_string(m)},
               "diag-general", n, m);
}

void verb_pad(Context& ctx, uint64_t n, uint64_t m) {
  const BitString x = algorithm_b(n, m);
  const BitString w = nat_to_string(m + 1);
  const Program witness = emit_program(x);
  const ExecResult replayed =
      run(witness, nat_to_string(n), ResourceBudget::steps(ctx.g.safety_cap));

  json results;
  results["n"] = n;
  results["m"] = m;
  results["w"] = w.to_string();
  results["x"] = x.to_string();
  results["witness"] = witness.to_string();
  results["witness_len"] = witness.size();
  results["witness_ok"] = replayed.halted() && replayed.output == x;
  results["overhead"] = witness.size() - w.size();
  ctx.report.results = std::move(results);

  ctx.replay = {"pad", "--n", std::to_string(n), "--m", std::to_string(m)};
  json params;
  params["n"] = n;
  params["m"] = m;
  ctx.finish_echo("pad", std::move(params));
}

void verb_sample(Context& ctx, uint64_t n, uint64_t a, uint64_t b,
                 std::optional<uint64_t> k1) {
  if (n == 0 || n > 20) {
    throw std::invalid_argument("sample: need 1 <= n <= 20");
  }
  std::vector<BitString> pool;
  pool.reserve(size_t{1} << n);
  for (uint64_t v = 0; v < (uint64_t{1} << n); ++v) {
    pool.push_back(BitString::from_value(v, n));
  }

  json results;
  results["n"] = n;
  results["a"] = a;
  results["b"] = b;
  results["pool_size"] = pool.size();

  std::function<bool(const BitString&)> pred;
  if (k1) {
    const BudgetPolicy policy = ctx.policy();
    policy.require_monotone_on(0, n);
    const CensusTable table = census(n, policy, {*k1}, ctx.cache, ctx.g.jobs);
    const CtValue threshold = CtValue::finite(n > *k1 ? n - *k1 : 0);
    auto values = std::make_shared<std::vector<CtValue>>();
    values->reserve(table.rows.size());
    for (const CensusRow& row : table.rows) values->push_back(row.value);
    pred = [values, threshold](const BitString& s) {
      return (*values)[s.value()] >= threshold;
    };
    results["k1"] = *k1;
    results["census_fraction"] = table.thresholds.front().fraction;
  }

  SeededBitSource coin(ctx.g.seed);
  const SampleReport report = select_random(pool, a, b, coin, pred);
  json chosen = json::array();
  for (const BitString& s : report.chosen) chosen.push_back(s.to_string());
  results["chosen"] = std::move(chosen);
  results["bits_consumed"] = report.bits_consumed;
  results["success"] =
      report.success ? json(*report.success) : json(nullptr);
  ctx.report.results = std::move(results);

  ctx.replay = {"sample", "--n", std::to_string(n), "--a", std::to_string(a),
                "--b", std::to_string(b)};
  if (k1) {
    ctx.replay.push_back("--k1");
    ctx.replay.push_back(std::to_string(*k1));
  }
  ctx.push_policy_args();
  json params;
  params["n"] = n;
  params["a"] = a;
  params["b"] = b;
  if (k1) params["k1"] = *k1;
  ctx.finish_echo("sample", std::move(params));
}

void verb_dilute(Context& ctx, const std::string& chi_str) {
  const BitString chi = BitString::from_string(chi_str);
  if (chi.size() > 24) {
    const uint64_t est = chi.size() + (uint64_t{1} << (chi.size() + 1)) - 2;
    throw InfeasibleError("dilution of " + std::to_string(chi.size()) +
                              " bits expands to " + std::to_string(est) +
                              " bits; the CLI caps the prefix at 24",
                          est);
  }
  const BitString zeta = dilute(chi);
  json results;
  results["chi"] = chi_str;
  results["zeta"] = zeta.to_string();
  results["length"] = zeta.size();
  ctx.report.results = std::move(results);

  ctx.replay = {"dilute", "--chi", chi_str};
  json params;
  params["chi"] = chi_str;
  ctx.finish_echo("dilute", std::move(params));
}

void verb_seq(Context& ctx, uint64_t c, uint64_t depth,
              const std::string& g_src, const std::string& choices_str,
              std::optional<uint64_t> prefix_len) {
  LevelParams params;
  params.c = c;
  params.policy = ctx.policy();
  params.g = BoundExpr::parse(g_src);
  params.depth = depth;
  const ChoiceSource choices = ChoiceSource::parse(choices_str);

  const BuildResult build = build_levels(params, ctx.cache, ctx.g.jobs);

  json results;
  results["c"] = c;
  results["depth"] = depth;
  results["g"] = g_src;
  results["choices"] = choices.describe();
  json jlevels = json::array();
  for (const PrefixLevel& level : build.levels) {
    json jl;
    jl["i"] = level.i;
    jl["m_i"] = level.m_i;
    jl["B_size"] = level.b_size;
    jl["D_size"] = level.d_size;
    json cs = json::array();
    for (const BitString& s : level.c_set) cs.push_back(s.to_string());
    jl["C_set"] = std::move(cs);
    jlevels.push_back(std::move(jl));
  }
  results["levels"] = std::move(jlevels);
  results["bottom"] =
      build.bottom ? json({{"level", build.bottom->level},
                           {"parent", build.bottom->parent.to_string()}})
                   : json(nullptr);
  if (prefix_len) {
    const BitString prefix = omega_prefix(build, choices, *prefix_len);
    results["prefix"] = prefix.to_string();
    // Measured description length: the parameter encoding plus one choice
    // bit per level consumed.
    size_t levels_used = 0;
    while (levels_used < build.levels.size() &&
           build.levels[levels_used].m_i < *prefix_len) {
      ++levels_used;
    }
    const std::string encoding =
        "c=" + std::to_string(c) + ";g=" + g_src + ";t=" +
        (ctx.g.t_src.empty() ? "-" : ctx.g.t_src) +
        (ctx.g.s_src.empty() ? "" : ";s=" + ctx.g.s_src);
    results["description_bits"] =
        *prefix_len == 0 ? 0 : 8 * encoding.size() + levels_used + 1;
  }
  ctx.report.results = std::move(results);

  ctx.replay = {"seq",        "--c",      std::to_string(c),
                "--depth",    std::to_string(depth),
                "--g-expr",   g_src,      "--choices", choices_str};
  if (prefix_len) {
    ctx.replay.push_back("--prefix-len");
    ctx.replay.push_back(std::to_string(*prefix_len));
  }
  ctx.push_policy_args();
  json echo_params;
  echo_params["c"] = c;
  echo_params["depth"] = depth;
  echo_params["g"] = g_src;
  echo_params["choices"] = choices_str;
  if (prefix_len) echo_params["prefix_len"] = *prefix_len;
  ctx.finish_echo("seq", std::move(echo_params));
}

void verb_merge(Context& ctx) {
  if (ctx.g.cache_dir.empty()) {
    throw std::invalid_argument("merge needs --cache-dir");
  }
  const MergeStats stats = merge_shards(ctx.g.cache_dir);
  json results;
  results["shards_in"] = stats.shards_in;
  results["records_in"] = stats.records_in;
  results["records_out"] = stats.records_out;
  results["duplicates"] = stats.duplicates;
  ctx.report.results = std::move(results);

  ctx.replay = {"merge"};
  ctx.finish_echo("merge", json::object());
}

}  // namespace

CliOutcome dispatch(const std::vector<std::string>& args) {
  CliOutcome outcome;
  Context ctx;

  CLI::App app{"desk-scale laboratory for resource-bounded complexity"};
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--t-expr", ctx.g.t_src, "step bound t as an expression in n");
  app.add_option("--space-expr", ctx.g.s_src,
                 "cell bound s as an expression in n (enables space mode)");
  app.add_option("--safety-cap", ctx.g.safety_cap,
                 "step ceiling applied when only a space bound is given");
  app.add_option("--cache-dir", ctx.g.cache_dir, "run-memo directory (JSONL shards)");
  app.add_option("--jobs", ctx.g.jobs, "worker threads for enumerations");
  app.add_option("--seed", ctx.g.seed, "seed for randomized procedures");
  app.add_option("--format", ctx.g.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", ctx.g.out_path, "write the report to this file");

  // run
  std::string p_str, y_str = "", x_str;
  std::optional<uint64_t> opt_steps, opt_cells;
  bool trace = false;
  auto* sc_run = app.add_subcommand("run", "execute one program on the machine");
  sc_run->add_option("--p", p_str, "program bits")->required();
  sc_run->add_option("--y", y_str, "condition bits");
  sc_run->add_option("--steps", opt_steps, "step budget (default: safety cap)");
  sc_run->add_option("--cells", opt_cells, "work-tape cell budget");
  sc_run->add_flag("--trace", trace, "emit one line per executed opcode");

  // ct
  auto* sc_ct = app.add_subcommand("ct", "exact resource-bounded complexity");
  sc_ct->add_option("--x", x_str, "target string")->required();
  sc_ct->add_option("--y", y_str, "condition bits");

  // upperc
  std::string schedule_str;
  auto* sc_upperc = app.add_subcommand("upperc", "anytime upper bound on C(x|y)");
  sc_upperc->add_option("--x", x_str, "target string")->required();
  sc_upperc->add_option("--y", y_str, "condition bits");
  sc_upperc->add_option("--schedule", schedule_str,
                        "comma-separated increasing budgets")->required();

  // census
  uint64_t n = 0, m = 0, k1 = 0;
  std::string k1_list = "1,2,3";
  auto* sc_census = app.add_subcommand("census", "exact complexity of every length-n string");
  sc_census->add_option("--n", n, "string length")->required();
  sc_census->add_option("--k1", k1_list, "comma-separated k1 thresholds");

  // diag
  auto* sc_diag = app.add_subcommand("diag", "diagonalization against short fast programs");
  sc_diag->add_option("--n", n, "output length")->required();
  sc_diag->add_option("--k1", k1, "incompressibility margin")->required();
  sc_diag->add_option("--m", m, "candidate index")->required();

  // diag-general
  std::string g_src = "n/2 - log n";
  auto* sc_diag_g = app.add_subcommand("diag-general", "diagonalization with cutoff g(n)");
  sc_diag_g->add_option("--n", n, "output length")->required();
  sc_diag_g->add_option("--g-expr", g_src, "program length cutoff")->required();
  sc_diag_g->add_option("--m", m, "candidate index")->required();

  // pad
  auto* sc_pad = app.add_subcommand("pad", "zero-padded pairing string");
  sc_pad->add_option("--n", n, "output length")->required();
  sc_pad->add_option("--m", m, "index")->required();

  // sample
  uint64_t a = 8, b = 5;
  std::optional<uint64_t> opt_k1;
  auto* sc_sample = app.add_subcommand("sample", "seeded bisection sampling of length-n strings");
  sc_sample->add_option("--n", n, "string length")->required();
  sc_sample->add_option("--a", a, "selections per round");
  sc_sample->add_option("--b", b, "rounds");
  sc_sample->add_option("--k1", opt_k1,
                        "check hits against the census at threshold n-k1");

  // dilute
  std::string chi_str;
  auto* sc_dilute = app.add_subcommand("dilute", "interleave with growing zero blocks");
  sc_dilute->add_option("--chi", chi_str, "prefix to dilute")
      ->required()
      ->expected(1);

  // seq
  uint64_t c = 4, depth = 0;
  std::string choices_str = "const0";
  std::string seq_g_src = "n/2 - log n";
  std::optional<uint64_t> prefix_len;
  auto* sc_seq = app.add_subcommand("seq", "prefix tree of incompressible sequences");
  sc_seq->add_option("--c", c, "base length (power of two >= 2)");
  sc_seq->add_option("--depth", depth, "deepest level to build")->required();
  sc_seq->add_option("--g-expr", seq_g_src, "program length cutoff g");
  sc_seq->add_option("--choices", choices_str,
                     "branch bits: 0/1 string, const0, const1, or expression");
  sc_seq->add_option("--prefix-len", prefix_len, "emit the n-length prefix");

  // merge
  auto* sc_merge = app.add_subcommand("merge", "compact cache shards");

  std::vector<const char*> argv;
  argv.push_back("ctlab");
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    outcome.error = app.help();
    outcome.exit_code = 0;
    return outcome;
  } catch (const CLI::ParseError& e) {
    outcome.error = std::string("usage error: ") + e.what();
    outcome.exit_code = 2;
    return outcome;
  }

  if (ctx.g.jobs < 1) ctx.g.jobs = 1;

  const auto t0 = std::chrono::steady_clock::now();
  const MeterSnapshot meter0 = meter_snapshot();
  std::unique_ptr<RunCache> cache;
  uint64_t cache_lookups0 = 0, cache_hits0 = 0;

  try {
    if (!ctx.g.cache_dir.empty() && !sc_merge->parsed()) {
      cache = std::make_unique<RunCache>(ctx.g.cache_dir);
      ctx.cache = cache.get();
      cache_lookups0 = cache->lookups();
      cache_hits0 = cache->hits();
    }

    if (sc_run->parsed()) {
      verb_run(ctx, p_str, y_str, opt_steps, opt_cells, trace);
    } else if (sc_ct->parsed()) {
      verb_ct(ctx, x_str, y_str);
    } else if (sc_upperc->parsed()) {
      verb_upperc(ctx, x_str, y_str, schedule_str);
    } else if (sc_census->parsed()) {
      verb_census(ctx, n, k1_list);
    } else if (sc_diag->parsed()) {
      verb_diag(ctx, n, k1, m);
    } else if (sc_diag_g->parsed()) {
      verb_diag_general(ctx, n, g_src, m);
    } else if (sc_pad->parsed()) {
      verb_pad(ctx, n, m);
    } else if (sc_sample->parsed()) {
      verb_sample(ctx, n, a, b, opt_k1);
    } else if (sc_dilute->parsed()) {
      verb_dilute(ctx, chi_str);
    } else if (sc_seq->parsed()) {
      verb_seq(ctx, c, depth, seq_g_src, choices_str, prefix_len);
    } else if (sc_merge->parsed()) {
      verb_merge(ctx);
    }
    if (cache) cache->flush();
  } catch (const InfeasibleError& e) {
    outcome.error = std::string("infeasible: ") + e.what();
    outcome.exit_code = 3;
    return outcome;
  } catch (const BoundParseError& e) {
    outcome.error = std::string("usage error: ") + e.what();
    outcome.exit_code = 2;
    return outcome;
  } catch (const std::invalid_argument& e) {
    outcome.error = std::string("usage error: ") + e.what();
    outcome.exit_code = 2;
    return outcome;
  } catch (const std::exception& e) {
    outcome.error = std::string("error: ") + e.what();
    outcome.exit_code = 1;
    return outcome;
  }

  const MeterSnapshot meter1 = meter_snapshot();
  const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  json counters;
  counters["wall_ms"] = wall;
  counters["vm_runs"] = meter1.runs - meter0.runs;
  counters["vm_steps"] = meter1.steps - meter0.steps;
  counters["jobs"] = ctx.g.jobs;
  if (cache) {
    counters["cache_lookups"] = cache->lookups() - cache_lookups0;
    counters["cache_hits"] = cache->hits() - cache_hits0;
    counters["programs_enumerated"] = cache->lookups() - cache_lookups0;
  } else {
    counters["cache_lookups"] = 0;
    counters["cache_hits"] = 0;
    counters["programs_enumerated"] = meter1.runs - meter0.runs;
  }
  ctx.report.counters = std::move(counters);

  outcome.report = std::move(ctx.report);
  outcome.has_report = true;
  outcome.format = ctx.g.format;
  outcome.out_path = ctx.g.out_path;
  outcome.exit_code = 0;
  return outcome;
}

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  CliOutcome outcome = dispatch(args);

  if (!outcome.error.empty()) {
    err << outcome.error << '\n';
  }
  if (!outcome.has_report) return outcome.exit_code;

  std::ostringstream body;
  if (outcome.format == "csv") {
    if (outcome.report.echo.value("verb", "") == "census") {
      // columns: x, ct_value, witness
      body << "x,ct_value,witness\n";
      for (const auto& row : outcome.report.results.at("rows")) {
        body << row.at("x").get<std::string>() << ','
             << (row.at("value").is_string()
                     ? row.at("value").get<std::string>()
                     : std::to_string(row.at("value").get<uint64_t>()))
             << ','
             << (row.at("witness").is_null()
                     ? ""
                     : row.at("witness").get<std::string>())
             << '\n';
      }
    } else {
      flatten_csv(outcome.report.results, "", body);
    }
  } else {
    body << outcome.report.to_json().dump(2) << '\n';
  }

  if (!outcome.out_path.empty()) {
    std::ofstream f(outcome.out_path, std::ios::trunc);
    if (!f) {
      err << "error: cannot write " << outcome.out_path << '\n';
      return 1;
    }
    f << body.str();
  } else {
    out << body.str();
  }
  return outcome.exit_code;
}

}  // namespace ctlab
