#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "veriscope/experiments.hpp"
#include "veriscope/io.hpp"
#include "veriscope/mes.hpp"
#include "veriscope/provenance.hpp"
#include "veriscope/query.hpp"
#include "veriscope/reduce.hpp"
#include "veriscope/risky.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace veriscope;

namespace {

struct RunConfig {
  std::string schema;
  std::string data_dir;
  std::string labels;
  std::string truth;
  std::string query;
  std::string out_dir = "out";
  uint64_t seed = 0;
  int jobs = 1;
  double theta = 0.0;
  long budget = 1000;
  std::string verifier = "majority";
  double worker_error = 0.1;
  double oracle_error = 0.0;
  int vote_cap = 10001;
  int top_k = 1;
  int mu = 50;
  int risky_max = 64;
  double risky_seconds = 10.0;
  double reverify_target = 0.3;
  double target_p = 0.01;
  std::string strategy = "random";
  std::string strategies = "all";
  std::string scenario = "avg";
  int repeats = 1;
  int output_index = 0;
  bool reverify = false;

  VerifierModel model() const {
    VerifierModel m;
    if (verifier == "majority")
      m.kind = VerifierModel::Kind::MajorityVote;
    else if (verifier == "oracle")
      m.kind = VerifierModel::Kind::FixedOracle;
    else
      throw ConfigError("verifier must be 'majority' or 'oracle'");
    m.worker_error = worker_error;
    m.oracle_error = oracle_error;
    m.vote_cap = vote_cap;
    m.validate();
    return m;
  }

  ReduceConfig reduce() const {
    ReduceConfig c;
    c.theta = theta;
    c.top_k = top_k;
    c.mu = mu;
    c.risky_limits.max_candidates = risky_max;
    c.risky_limits.wall_seconds = risky_seconds;
    c.reverify_target = reverify_target;
    return c;
  }
};

struct LoadedInputs {
  std::vector<RelationSchema> schemas;
  std::shared_ptr<const Database> db;
  AnnotatedDes des;
  std::optional<QueryPlan> plan;
  std::vector<AnnotatedOutput> outputs;
  std::optional<World> truth;
};

LoadedInputs load_inputs(const RunConfig& cfg, bool need_query,
                         bool need_truth) {
  LoadedInputs in;
  if (cfg.schema.empty()) throw ConfigError("--schema is required");
  if (cfg.data_dir.empty()) throw ConfigError("--data is required");
  in.schemas = load_schema(cfg.schema);
  in.db = load_database(in.schemas, cfg.data_dir);
  LabelFile lf;
  if (!cfg.labels.empty()) lf = load_labels(cfg.labels, in.db->tuple_count());
  in.des = build_annotated_des(in.db, lf.labels, lf.errs);
  if (need_query || !cfg.query.empty()) {
    if (cfg.query.empty()) throw ConfigError("--query is required");
    in.plan = parse_query(read_text_file(cfg.query), in.schemas);
    in.outputs = evaluate_with_provenance(in.des, *in.plan);
  }
  if (need_truth || !cfg.truth.empty()) {
    if (cfg.truth.empty()) throw ConfigError("--truth is required");
    in.truth = load_truth(cfg.truth, in.db->tuple_count());
  }
  return in;
}

std::string derived_string(std::span<const Tri> derived) {
  std::string s;
  for (Tri d : derived)
    s += d == Tri::Unknown ? 'u' : (d == Tri::True ? '1' : '0');
  return s;
}

std::string witness_string(const std::map<VarId, bool>& w) {
  std::string s;
  for (const auto& [v, b] : w) {
    if (!s.empty()) s += ';';
    s += std::to_string(v) + "=" + (b ? "1" : "0");
  }
  return s;
}

std::string changed_string(const std::vector<TupleId>& changed) {
  std::string s;
  for (TupleId t : changed) {
    if (!s.empty()) s += ';';
    s += std::to_string(t);
  }
  return s;
}

std::string log_string(const LogProb& p) {
  return p.is_zero() ? "-inf" : format_double(p.log());
}

void ensure_out(const RunConfig& cfg) { fs::create_directories(cfg.out_dir); }

void write_trace_csv(const std::string& path, const ReductionTrace& trace) {
  std::vector<std::vector<std::string>> rows;
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    rows.push_back({std::to_string(i), std::to_string(s.cost),
                    changed_string(s.changed), format_double(s.max_mes.linear()),
                    log_string(s.max_mes), derived_string(s.derived)});
  }
  write_csv_file(path, {"step", "cost", "changed", "max_mes", "max_mes_log",
                        "derived_labels"},
                 rows);
}

json trace_summary(const ReductionTrace& trace,
                   const std::vector<AnnotatedOutput>& outputs,
                   const World* truth, long budget) {
  json j;
  j["termination"] = to_string(trace.termination);
  j["steps"] = trace.steps.size() - 1;
  j["total_cost"] = trace.steps.back().cost;
  j["initial_max_mes"] = trace.steps.front().max_mes.linear();
  j["final_max_mes"] = trace.steps.back().max_mes.linear();
  auto ratio = mes_log_ratio(trace);
  if (ratio)
    j["mes_log_ratio"] = std::isinf(*ratio) ? json("inf") : json(*ratio);
  if (truth) {
    j["f1_auc"] = f1_auc(trace, outputs, *truth, budget);
    F1Stats final_f1 =
        f1_score(trace.steps.back().derived, outputs, *truth);
    j["final_precision"] = final_f1.precision;
    j["final_recall"] = final_f1.recall;
    j["final_f1"] = final_f1.f1;
  }
  auto now = std::chrono::system_clock::now().time_since_epoch();
  j["wall_clock_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  return j;
}

void write_final_labels(const std::string& path, const AnnotatedDes& des) {
  std::vector<std::vector<std::string>> rows;
  for (TupleId t = 0; t < des.tuple_count(); ++t) {
    if (!des.labeled(t)) {
      rows.push_back({std::to_string(t), "unknown", ""});
    } else {
      rows.push_back({std::to_string(t), to_string(des.label(t)),
                      format_double(*des.err(t))});
    }
  }
  write_csv_file(path, {"tuple_id", "label", "err"}, rows);
}

int cmd_eval(const RunConfig& cfg) {
  LoadedInputs in = load_inputs(cfg, true, false);
  ensure_out(cfg);
  std::vector<std::vector<std::string>> value_rows, prov_rows;
  for (const auto& o : in.outputs) {
    std::vector<std::string> row;
    for (const auto& c : o.values) row.push_back(cell_to_string(c));
    value_rows.push_back(row);
    row.push_back(to_string(o.prov));
    row.push_back(to_string(o.derived));
    prov_rows.push_back(row);
  }
  std::vector<std::string> header = in.plan->output_columns;
  write_csv_file(cfg.out_dir + "/outputs.csv", header, value_rows);
  header.push_back("provenance");
  header.push_back("derived");
  write_csv_file(cfg.out_dir + "/provenance.csv", header, prov_rows);
  std::cout << in.outputs.size() << " output tuples -> " << cfg.out_dir
            << "/outputs.csv\n";
  return 0;
}

int cmd_mes(const RunConfig& cfg) {
  LoadedInputs in = load_inputs(cfg, true, cfg.reverify);
  bool any_unknown = false;
  for (const auto& o : in.outputs) any_unknown |= !is_known(o.derived);
  if (any_unknown) {
    if (!cfg.reverify)
      throw PreconditionError(
          "some outputs have unknown labels; pass --reverify (with --truth) "
          "to resolve them");
    Budget budget{cfg.budget, 0};
    Rng rng(derive_seed(cfg.seed, {5}));
    re_verify(in.des, in.outputs, budget, cfg.reverify_target, *in.truth,
              cfg.model(), rng, nullptr);
  }
  ensure_out(cfg);
  std::vector<std::vector<std::string>> rows;
  for (const auto& o : in.outputs) {
    std::vector<std::string> row;
    for (const auto& c : o.values) row.push_back(cell_to_string(c));
    if (!is_known(o.derived)) {
      row.insert(row.end(), {"unknown", "", "", "", "", ""});
      rows.push_back(row);
      continue;
    }
    MesScore s = mes(in.des, o);
    int n = labeled_rel_count(in.des, o);
    auto avg = averaged_mes(s.log_value, n);
    row.push_back(to_string(o.derived));
    row.push_back(format_double(s.log_value.linear()));
    row.push_back(log_string(s.log_value));
    row.push_back(avg ? format_double(*avg) : "");
    row.push_back(witness_string(s.worst_world));
    row.push_back(to_string(s.method));
    rows.push_back(row);
  }
  std::vector<std::string> header = in.plan->output_columns;
  for (const char* h :
       {"derived", "mes", "mes_log", "averaged_mes", "witness", "method"})
    header.push_back(h);
  write_csv_file(cfg.out_dir + "/mes.csv", header, rows);
  std::cout << rows.size() << " rows -> " << cfg.out_dir << "/mes.csv\n";
  return 0;
}

int cmd_risky(const RunConfig& cfg) {
  LoadedInputs in = load_inputs(cfg, true, false);
  if (cfg.output_index < 0 ||
      static_cast<size_t>(cfg.output_index) >= in.outputs.size())
    throw ConfigError("--output-index out of range");
  const auto& output = in.outputs[static_cast<size_t>(cfg.output_index)];
  if (!is_known(output.derived))
    throw PreconditionError(
        "the chosen output has an unknown label; re-verify first");
  RiskyLimits limits;
  limits.max_candidates = cfg.risky_max;
  limits.wall_seconds = cfg.risky_seconds;
  limits.probe_impairing = true;
  auto reports = classify_tuples(in.des, output, limits);
  ensure_out(cfg);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    rows.push_back({std::to_string(r.tuple), to_string(r.cls),
                    format_double(r.baseline_mes.linear()),
                    r.zero_err_mes ? format_double(r.zero_err_mes->linear()) : "",
                    r.probed_q ? format_double(*r.probed_q) : "",
                    r.impairing_approx ? (*r.impairing_approx ? "1" : "0") : ""});
  }
  write_csv_file(cfg.out_dir + "/risky.csv",
                 {"tuple_id", "classification", "baseline_mes", "zero_err_mes",
                  "probed_q", "impairing_approx"},
                 rows);
  std::cout << rows.size() << " candidate tuples -> " << cfg.out_dir
            << "/risky.csv\n";
  return 0;
}

int cmd_reduce(const RunConfig& cfg, bool baseline) {
  LoadedInputs in = load_inputs(cfg, true, true);
  ensure_out(cfg);
  AnnotatedDes final_des;
  ReductionTrace trace;
  if (baseline) {
    BaselineKind kind;
    if (cfg.strategy == "random")
      kind = BaselineKind::Random;
    else if (cfg.strategy == "formula-count")
      kind = BaselineKind::FormulaCount;
    else if (cfg.strategy == "occurrences-count")
      kind = BaselineKind::OccurrencesCount;
    else if (cfg.strategy == "prob-greedy")
      kind = BaselineKind::ProbGreedy;
    else
      throw ConfigError("unknown baseline strategy '" + cfg.strategy + "'");
    trace = run_baseline(kind, cfg.target_p, in.des, in.outputs,
                         Budget{cfg.budget, 0}, *in.truth, cfg.model(),
                         cfg.seed, &final_des);
  } else {
    trace = mes_reduce(in.des, in.outputs, Budget{cfg.budget, 0}, cfg.reduce(),
                       *in.truth, cfg.model(), cfg.seed, &final_des);
  }
  write_trace_csv(cfg.out_dir + "/trace.csv", trace);
  write_final_labels(cfg.out_dir + "/final_labels.csv", final_des);
  json j = trace_summary(trace, in.outputs, &*in.truth, cfg.budget);
  j["command"] = baseline ? "baseline" : "reduce";
  if (baseline) j["strategy"] = cfg.strategy;
  j["seed"] = cfg.seed;
  j["budget"] = cfg.budget;
  write_text_file(cfg.out_dir + "/summary.json", j.dump(2) + "\n");
  std::cout << "termination: " << to_string(trace.termination)
            << ", cost: " << trace.steps.back().cost << ", final max MES: "
            << format_double(trace.steps.back().max_mes.linear()) << "\n";
  return 0;
}

std::vector<StrategySpec> parse_strategies(const std::string& text,
                                           double default_p) {
  std::vector<StrategySpec> out;
  auto add_baseline = [&](BaselineKind k, double p) {
    StrategySpec s;
    s.mesreduce = false;
    s.kind = k;
    s.target_p = p;
    out.push_back(s);
  };
  if (text == "all") {
    StrategySpec mr;
    mr.mesreduce = true;
    out.push_back(mr);
    for (BaselineKind k :
         {BaselineKind::Random, BaselineKind::FormulaCount,
          BaselineKind::OccurrencesCount, BaselineKind::ProbGreedy})
      add_baseline(k, default_p);
    return out;
  }
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    double p = default_p;
    size_t colon = item.find(':');
    std::string name = item.substr(0, colon);
    if (colon != std::string::npos) p = std::stod(item.substr(colon + 1));
    if (name == "mesreduce") {
      StrategySpec mr;
      mr.mesreduce = true;
      out.push_back(mr);
    } else if (name == "random")
      add_baseline(BaselineKind::Random, p);
    else if (name == "formula-count")
      add_baseline(BaselineKind::FormulaCount, p);
    else if (name == "occurrences-count")
      add_baseline(BaselineKind::OccurrencesCount, p);
    else if (name == "prob-greedy")
      add_baseline(BaselineKind::ProbGreedy, p);
    else
      throw ConfigError("unknown strategy '" + name + "'");
  }
  if (out.empty()) throw ConfigError("no strategies given");
  return out;
}

std::string file_safe(std::string s) {
  for (char& c : s)
    if (c == '(' || c == ')' || c == '=' || c == ',') c = '_';
  return s;
}

int cmd_experiment(const RunConfig& cfg) {
  ScenarioKind scenario = scenario_from_string(cfg.scenario);
  bool need_truth = scenario == ScenarioKind::Rlbl;
  LoadedInputs in = load_inputs(cfg, true, need_truth);
  auto strategies = parse_strategies(cfg.strategies, cfg.target_p);
  auto rows = run_comparison(in.des, in.outputs, {scenario}, strategies,
                             Budget{cfg.budget, 0}, cfg.repeats, cfg.seed,
                             cfg.reduce(), cfg.model(), cfg.jobs,
                             in.truth ? &*in.truth : nullptr);
  ensure_out(cfg);
  fs::create_directories(cfg.out_dir + "/traces");

  std::vector<std::vector<std::string>> agg;
  std::vector<std::vector<std::string>> curves;
  for (const auto& row : rows) {
    std::string ratio;
    if (row.mean_mes_log_ratio)
      ratio = std::isinf(*row.mean_mes_log_ratio)
                  ? "inf"
                  : format_double(*row.mean_mes_log_ratio);
    agg.push_back({row.strategy, to_string(row.scenario), ratio,
                   format_double(row.worst_f1_auc),
                   std::to_string(row.runs.size())});
    for (const auto& run : row.runs) {
      // re-derive the scenario truth for the curve's F1 values
      uint64_t scenario_seed =
          derive_seed(cfg.seed, {10, static_cast<uint64_t>(row.scenario),
                                 static_cast<uint64_t>(run.repeat)});
      Scenario scen = gen_scenario(row.scenario, in.des, scenario_seed,
                                   in.truth ? &*in.truth : nullptr);
      for (size_t s = 0; s < run.trace.steps.size(); ++s) {
        const auto& step = run.trace.steps[s];
        F1Stats f = f1_score(step.derived, in.outputs, scen.truth);
        curves.push_back({row.strategy, to_string(row.scenario),
                          std::to_string(run.repeat), std::to_string(s),
                          std::to_string(step.cost), format_double(f.precision),
                          format_double(f.recall), format_double(f.f1),
                          log_string(step.max_mes)});
      }
      write_trace_csv(cfg.out_dir + "/traces/" + file_safe(row.strategy) +
                          "_r" + std::to_string(run.repeat) + ".csv",
                      run.trace);
    }
  }
  write_csv_file(cfg.out_dir + "/aggregate.csv",
                 {"strategy", "scenario", "mean_mes_log_ratio", "worst_f1_auc",
                  "repeats"},
                 agg);
  write_csv_file(cfg.out_dir + "/curves.csv",
                 {"strategy", "scenario", "repeat", "step", "cost", "precision",
                  "recall", "f1", "max_mes_log"},
                 curves);
  json j;
  j["command"] = "experiment";
  j["scenario"] = to_string(scenario);
  j["repeats"] = cfg.repeats;
  j["budget"] = cfg.budget;
  j["seed"] = cfg.seed;
  auto now = std::chrono::system_clock::now().time_since_epoch();
  j["wall_clock_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  write_text_file(cfg.out_dir + "/summary.json", j.dump(2) + "\n");
  std::cout << rows.size() << " strategy rows -> " << cfg.out_dir
            << "/aggregate.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"veriscope: query-aware analysis of data-verification errors"};
  app.set_config("--config", "", "flat key=value configuration file");
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--schema", cfg.schema, "schema file");
    cmd->add_option("--data", cfg.data_dir, "directory with <Relation>.csv");
    cmd->add_option("--labels", cfg.labels, "labels CSV (tuple_id,label,err)");
    cmd->add_option("--truth", cfg.truth, "ground truth CSV (tuple_id,label)");
    cmd->add_option("--query", cfg.query, "query file");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--seed", cfg.seed, "master RNG seed");
    cmd->add_option("--jobs", cfg.jobs, "parallel repeats");
    cmd->add_option("--theta", cfg.theta, "target MES threshold");
    cmd->add_option("--budget", cfg.budget, "vote budget");
    cmd->add_option("--verifier", cfg.verifier, "majority | oracle");
    cmd->add_option("--worker-error", cfg.worker_error,
                    "majority-vote worker error rate");
    cmd->add_option("--oracle-error", cfg.oracle_error, "fixed-oracle error");
    cmd->add_option("--vote-cap", cfg.vote_cap, "max votes per verification");
    cmd->add_option("--top-k", cfg.top_k, "outputs improved per iteration");
    cmd->add_option("--mu", cfg.mu, "cap on max-MES ties considered");
    cmd->add_option("--risky-max", cfg.risky_max, "risky candidate cap");
    cmd->add_option("--risky-seconds", cfg.risky_seconds,
                    "risky search wall-clock limit");
    cmd->add_option("--reverify-target", cfg.reverify_target,
                    "target err for re-verification");
    cmd->add_option("--target-p", cfg.target_p, "baseline target probability");
  };

  auto* eval = app.add_subcommand("eval", "evaluate a query with provenance");
  add_common(eval);
  auto* mes_cmd = app.add_subcommand("mes", "maximal error scores per output");
  add_common(mes_cmd);
  mes_cmd->add_flag("--reverify", cfg.reverify,
                    "resolve unknown output labels first");
  auto* risky = app.add_subcommand("risky", "risky-tuple report for an output");
  add_common(risky);
  risky->add_option("--output-index", cfg.output_index,
                    "row index into the sorted outputs");
  auto* reduce = app.add_subcommand("reduce", "run MESReduce");
  add_common(reduce);
  auto* baseline = app.add_subcommand("baseline", "run a baseline strategy");
  add_common(baseline);
  baseline->add_option("--strategy", cfg.strategy,
                       "random | formula-count | occurrences-count | "
                       "prob-greedy");
  auto* experiment =
      app.add_subcommand("experiment", "comparative harness runs");
  add_common(experiment);
  experiment->add_option("--scenario", cfg.scenario, "wcs | avg | rlbl");
  experiment->add_option("--repeats", cfg.repeats, "paired repeats");
  experiment->add_option("--strategies", cfg.strategies,
                         "'all' or comma list (name[:p])");

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval->parsed()) return cmd_eval(cfg);
    if (mes_cmd->parsed()) return cmd_mes(cfg);
    if (risky->parsed()) return cmd_risky(cfg);
    if (reduce->parsed()) return cmd_reduce(cfg, false);
    if (baseline->parsed()) return cmd_reduce(cfg, true);
    if (experiment->parsed()) return cmd_experiment(cfg);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const QueryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
