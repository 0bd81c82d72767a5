// pfa: generate instances, run mechanisms, and run seeded experiments.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pfa/clinching.hpp"
#include "pfa/envyfree.hpp"
#include "pfa/experiments.hpp"
#include "pfa/io.hpp"
#include "pfa/oracle.hpp"
#include "pfa/profit.hpp"

namespace {

using pfa::Json;

struct Sink {
  std::ofstream file;
  std::ostream* out = &std::cout;

  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file.open(path);
    if (!file) throw pfa::InvalidInput("cannot open output file: " + path);
    out = &file;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pfa::InvalidInput("cannot read instance: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

pfa::Distribution parse_dist(const std::string& name) {
  if (name == "uniform") return pfa::Distribution::Uniform;
  if (name == "exponential") return pfa::Distribution::Exponential;
  throw pfa::InvalidInput("unknown distribution: " + name);
}

std::optional<double> parse_budget(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (text == "inf") return pfa::kInfinity;
  std::size_t used = 0;
  const double b = std::stod(text, &used);
  if (used != text.size()) throw pfa::InvalidInput("budget must be a number or \"inf\"");
  return b;
}

/// "a..b" or "a"
std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = static_cast<std::size_t>(std::stoul(text));
      return {v, v};
    }
    return {static_cast<std::size_t>(std::stoul(text.substr(0, dots))),
            static_cast<std::size_t>(std::stoul(text.substr(dots + 2)))};
  } catch (const std::logic_error&) {
    throw pfa::InvalidInput("bad range: " + text);
  }
}

Json trace_json(const pfa::ClinchingTrace& trace) {
  Json events = Json::array();
  for (const auto& e : trace.events) {
    events.push_back({{"price", e.price},
                      {"price_start", e.price_start},
                      {"active_count", e.active},
                      {"per_agent_clinch", e.per_agent_clinch},
                      {"per_agent_payment", e.per_agent_payment},
                      {"kind", pfa::to_string(e.kind)}});
  }
  return events;
}

double max_gap(const pfa::Outcome& a, const pfa::Outcome& b) {
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    gap = std::max({gap, std::abs(a.alloc[i] - b.alloc[i]), std::abs(a.pay[i] - b.pay[i])});
  }
  return gap;
}

struct RunOptions {
  std::string mechanism;
  std::string instance;
  double q = 0.25;
  std::uint64_t seed = 1;
  bool trace = false;
  bool oracle = false;
  double step = 1e-4;
  std::string out;
};

int cmd_run(const RunOptions& o) {
  const auto inst = pfa::parse_instance(read_file(o.instance));
  pfa::Outcome outcome;
  Json extra = Json::object();

  if (o.mechanism == "clinching") {
    const auto cf = pfa::closed_form(inst);
    outcome = cf.outcome;
    extra["structure"] = {{"k", cf.structure.k},
                          {"delta", cf.structure.delta},
                          {"phase2_start", cf.structure.phase2_start}};
    if (o.trace) extra["trace"] = trace_json(pfa::run_clock(inst).trace);
    if (o.oracle) {
      const auto sim = pfa::oracle::simulate_clock(inst, o.step);
      extra["oracle"] = {{"step", o.step},
                         {"clock_max_abs_diff", max_gap(outcome, sim.outcome)},
                         {"run_clock_max_abs_diff", max_gap(outcome, pfa::run_clock(inst).outcome)}};
    }
  } else if (o.mechanism == "efo-welfare" || o.mechanism == "efo-revenue") {
    const bool welfare = o.mechanism == "efo-welfare";
    const auto r = welfare ? pfa::efo_welfare(inst) : pfa::efo_revenue(inst);
    outcome = r.outcome;
    extra["objective"] = r.objective;
    extra["multiplier"] = r.multiplier;
    extra["mix"] = r.mix;
    if (o.oracle) {
      const auto lp = welfare ? pfa::oracle::lp_efo_welfare(inst) : pfa::oracle::lp_efo_revenue(inst);
      extra["oracle"] = {{"lp_objective", lp.objective}, {"abs_diff", std::abs(lp.objective - r.objective)}};
    }
  } else if (o.mechanism == "bspe") {
    outcome = pfa::bspe_budget(inst, o.q, o.seed);
  } else if (o.mechanism == "bspe-nobudget") {
    const auto r = pfa::bspe_nobudget(inst, o.q, o.seed);
    outcome = r.outcome;
    extra["rejected"] = r.rejected;
    extra["fallback"] = r.fallback;
    extra["bumped"] = r.bumped;
  } else if (o.mechanism == "pseudo-vickrey") {
    outcome = pfa::pseudo_vickrey(inst);
  } else if (o.mechanism == "combined") {
    outcome = pfa::combined_mechanism(inst, o.q, o.seed);
  } else {
    throw pfa::InvalidInput("unknown mechanism: " + o.mechanism);
  }

  if (o.oracle && extra.find("oracle") == extra.end()) {
    extra["oracle"] = {{"lp_efo_revenue", pfa::oracle::lp_efo_revenue(inst).objective},
                       {"envy_violations", pfa::oracle::exhaustive_envy_check(inst.values(), outcome).size()}};
  }

  Json doc = pfa::outcome_to_json(inst, outcome);
  doc["mechanism"] = o.mechanism;
  for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = it.value();
  Sink sink(o.out);
  *sink.out << doc.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prior-free auctions for budgeted agents"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Emit an instance as JSON");
  std::string gen_kind;
  std::size_t gen_N = 3;
  double gen_eps = 1e-6;
  std::size_t gen_n = 8;
  std::uint64_t gen_seed = 1;
  std::string gen_budget;
  std::string gen_out;
  gen->add_option("kind", gen_kind, "tight | uniform | exponential")->required();
  gen->add_option("--N", gen_N, "tight instance size parameter (N >= 2)");
  gen->add_option("--eps", gen_eps, "tight instance perturbation");
  gen->add_option("--n", gen_n, "number of agents for random instances");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--budget", gen_budget, "budget (number or inf); random if omitted");
  gen->add_option("--out", gen_out, "output file (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "Run a mechanism on an instance file and print the outcome JSON");
  RunOptions ro;
  run->add_option("mechanism", ro.mechanism,
                  "clinching | efo-welfare | efo-revenue | bspe | bspe-nobudget | pseudo-vickrey | combined")
      ->required();
  run->add_option("instance", ro.instance, "instance JSON file")->required();
  run->add_option("--q", ro.q, "sampling probability in (0, 0.5)");
  run->add_option("--seed", ro.seed, "random seed");
  run->add_flag("--trace", ro.trace, "include the clinching event trace");
  run->add_flag("--oracle", ro.oracle, "include oracle comparisons");
  run->add_option("--step", ro.step, "clock step for the oracle simulator");
  run->add_option("--out", ro.out, "output file (default stdout)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a seeded experiment and emit CSV");
  exp->footer(
      "Columns:\n"
      "  welfare-approx:   trial,seed,n,budget,efo_welfare,clinching_welfare,ratio,within_two\n"
      "  bspe-revenue:     trial,seed,q,revenue,efo2,bound,one_ahead_index\n"
      "  dominance-walk:   trial,seed,top_in_market,pointwise_fails,one_ahead_index\n"
      "  tight-ratio:      N,seed,efo_welfare,clinching_welfare,ratio,formula,abs_error\n"
      "  oracle-agreement: trial,seed,n,budget,efo_welfare,lp_welfare,efo_revenue,lp_revenue,rel_diff\n"
      "Summary rows start with #summary. Exit status 1 when a bound check fails.");
  std::string exp_kind;
  pfa::ExperimentConfig cfg;
  std::string exp_range = "3..400";
  std::string exp_dist = "uniform";
  std::string exp_budget;
  std::string exp_instance;
  std::string exp_out;
  exp->add_option("kind", exp_kind, "welfare-approx | bspe-revenue | dominance-walk | tight-ratio | oracle-agreement")
      ->required();
  exp->add_option("--trials", cfg.trials, "number of trials");
  exp->add_option("--seed", cfg.seed, "master seed");
  exp->add_option("--q", cfg.q, "sampling probability in (0, 0.5)");
  exp->add_option("--n", cfg.n, "number of agents (maximum for oracle-agreement)");
  exp->add_option("--N", exp_range, "tight-ratio range a..b");
  exp->add_option("--eps", cfg.eps, "tight instance perturbation");
  exp->add_option("--dist", exp_dist, "uniform | exponential");
  exp->add_option("--budget", exp_budget, "fixed budget (number or inf); random if omitted");
  exp->add_option("--mechanism", cfg.mechanism, "bspe-revenue mechanism: bspe | combined | bspe-nobudget");
  exp->add_option("--instance", exp_instance, "fixed instance file for bspe-revenue");
  exp->add_option("--out", exp_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      pfa::BudgetedInstance inst;
      if (gen_kind == "tight") {
        inst = pfa::tight_instance(gen_N, gen_eps);
      } else {
        inst = pfa::random_instance(gen_n, gen_seed, parse_dist(gen_kind), parse_budget(gen_budget));
      }
      Sink sink(gen_out);
      *sink.out << pfa::instance_to_json(inst).dump() << '\n';
      return 0;
    }
    if (*run) return cmd_run(ro);
    if (*exp) {
      cfg.kind = pfa::parse_experiment_kind(exp_kind);
      cfg.dist = parse_dist(exp_dist);
      cfg.budget = parse_budget(exp_budget);
      std::tie(cfg.n_min, cfg.n_max) = parse_range(exp_range);
      if (!exp_instance.empty()) cfg.instance = pfa::parse_instance(read_file(exp_instance));
      Sink sink(exp_out);
      const auto summary = pfa::run_experiment(cfg, *sink.out);
      return summary.ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
