// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "scalelab/bootstrap.hpp"
#include "scalelab/compute_hull.hpp"
#include "scalelab/error.hpp"
#include "scalelab/flops.hpp"
#include "scalelab/frontier.hpp"
#include "scalelab/ingest.hpp"
#include "scalelab/loss_fit.hpp"
#include "scalelab/metrics.hpp"
#include "scalelab/sparse_fit.hpp"
#include "scalelab/specialization.hpp"

namespace scalelab::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kThreadsEnv = "NMM_SCALELAB_THREADS";

// Raised for flag problems found after CLI11 parsing; maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  int digits = 0;  // 0 keeps full round-trip precision
  std::optional<unsigned> threads;
};

struct Filter {
  std::string eval_set = "avg";
  std::string arch;
  std::string mixture;
  double max_params = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--eval-set", eval_set, "Evaluation set to keep (caption|interleaved|text|avg|all)")
        ->check(CLI::IsMember({"caption", "interleaved", "text", "avg", "all"}))
        ->capture_default_str();
    cmd->add_option("--arch", arch, "Architecture to keep (early|late|moe_agnostic|moe_aware|moe)")
        ->check(CLI::IsMember({"early", "late", "moe_agnostic", "moe_aware", "moe"}));
    cmd->add_option("--mixture", mixture, "Data mixture label to keep");
    cmd->add_option("--max-params", max_params, "Drop runs with more model parameters than this")
        ->check(CLI::NonNegativeNumber);
  }

  std::vector<RunRecord> apply(const std::vector<RunRecord>& runs) const {
    std::vector<RunRecord> out;
    for (const RunRecord& r : runs) {
      if (eval_set != "all" && r.eval_set() != parse_eval_set(eval_set)) continue;
      if (!arch.empty()) {
        if (arch == "moe" ? !is_moe(r.arch()) : r.arch() != parse_arch(arch)) continue;
      }
      if (!mixture.empty() && r.mixture() != mixture) continue;
      if (max_params > 0 && r.model_params() > max_params) continue;
      out.push_back(r);
    }
    if (out.empty()) raise(ErrorCode::kEmptyDataset, "no runs match the selected filters", "input");
    return out;
  }
};

class Printer {
 public:
  explicit Printer(int digits) : digits_(digits) {}

  std::string operator()(double v) const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits_ > 0 ? digits_ : 17, v);
    return buf;
  }

 private:
  int digits_;
};

unsigned resolve_threads(const Globals& g) {
  if (g.threads) return *g.threads;
  const char* env = std::getenv(kThreadsEnv);
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0' || v > 4096) throw UsageError(std::string(kThreadsEnv) + ": expected a thread count");
  return static_cast<unsigned>(v);
}

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path == "-") {
    out << text;
  } else {
    write_file(path, text);
  }
}

std::string fit_summary(const LossSurfaceFit& f, const Printer& p) {
  std::ostringstream s;
  s << "E=" << p(f.e_irreducible) << " A=" << p(f.a_coef) << " B=" << p(f.b_coef) << " alpha=" << p(f.alpha)
    << " beta=" << p(f.beta) << " objective=" << p(f.objective) << " init=" << f.winning_init_index
    << " converged=" << (f.converged ? "true" : "false") << "\n";
  return s.str();
}

// Reads `--config` JSON and appends flags that the command line lacks.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string config_path;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config: missing file name");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (config_path.empty()) return kept;

  json doc;
  try {
    doc = json::parse(read_file(config_path));
  } catch (const json::parse_error& e) {
    raise(ErrorCode::kParseError, config_path + ": " + e.what(), "--config");
  }
  if (!doc.is_object()) raise(ErrorCode::kParseError, config_path + ": expected a JSON object", "--config");

  std::set<std::string> present;
  for (const std::string& a : kept) {
    if (a.rfind("--", 0) == 0) present.insert(a.substr(0, a.find('=')));
  }
  auto scalar = [&](const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    raise(ErrorCode::kParseError, config_path + ": unsupported value for '" + key + "'", "--config");
  };
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (present.count(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) kept.push_back(flag);
    } else if (value.is_array()) {
      kept.push_back(flag);
      for (const json& v : value) kept.push_back(scalar(v, key));
    } else if (!value.is_null()) {
      kept.push_back(flag);
      kept.push_back(scalar(value, key));
    }
  }
  return kept;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scaling-law estimation for native multimodal models", "scalelab"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--digits", g.digits, "Significant digits for printed numbers (default: full precision)")
      ->check(CLI::Range(1, 17));
  app.add_option("--threads", g.threads, "Worker threads (default: all cores, or $NMM_SCALELAB_THREADS)");
  app.footer("--config FILE reads flag values from a JSON object; command-line flags take precedence.");

  std::function<void()> action;
  const auto printer = [&] { return Printer(g.digits); };

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit L = E + A/N^alpha + B/D^beta to run records");
  std::string fit_input, fit_out = "-";
  Filter fit_filter;
  double fit_delta = 1e-3;
  fit_cmd->add_option("--input", fit_input, "Run CSV or JSON file")->required()->check(CLI::ExistingFile);
  fit_filter.attach(fit_cmd);
  fit_cmd->add_option("--delta", fit_delta, "Huber transition delta")->check(CLI::PositiveNumber)->capture_default_str();
  fit_cmd->add_option("--out", fit_out, "Output JSON path, '-' for stdout")->capture_default_str();
  fit_cmd->callback([&] {
    action = [&] {
      const auto runs = fit_filter.apply(load_runs(fit_input));
      FitConfig cfg;
      cfg.huber_delta = fit_delta;
      cfg.threads = resolve_threads(g);
      const LossSurfaceFit fit = fit_loss_surface(loss_points(runs), cfg);
      emit(out, fit_out, fit_to_json(fit));
      (fit_out == "-" ? err : out) << fit_summary(fit, printer());
    };
  });

  // frontier
  auto* fr_cmd = app.add_subcommand("frontier", "Derive compute-optimal allocation laws from a fit");
  std::string fr_fit, fr_method = "regression", fr_relation = "early", fr_input, fr_out = "-", fr_optima;
  std::vector<double> fr_flops;
  DGridConfig fr_grid;
  FlopsRange fr_range;
  Filter fr_filter;
  std::optional<double> fr_vision_p, fr_vision_q;
  double fr_offset = kDefaultVisionOffset;
  fr_cmd->add_option("--fit", fr_fit, "Loss-surface fit JSON")->required()->check(CLI::ExistingFile);
  fr_cmd->add_option("--method", fr_method, "regression|closed-form")
      ->check(CLI::IsMember({"regression", "closed-form"}))
      ->capture_default_str();
  fr_cmd->add_option("--relation", fr_relation, "Budget relation early|late")
      ->check(CLI::IsMember({"early", "late"}))
      ->capture_default_str();
  fr_cmd->add_option("--input", fr_input, "Runs whose FLOPs set the budgets (and the vision model for late)")
      ->check(CLI::ExistingFile);
  fr_filter.attach(fr_cmd);
  fr_cmd->add_option("--flops", fr_flops, "Explicit FLOPs budgets")->check(CLI::PositiveNumber);
  fr_cmd->add_option("--d-min", fr_grid.d_min, "Smallest candidate token count")->check(CLI::PositiveNumber)->capture_default_str();
  fr_cmd->add_option("--d-max", fr_grid.d_max, "Largest candidate token count")->check(CLI::PositiveNumber)->capture_default_str();
  fr_cmd->add_option("--d-points", fr_grid.points, "Log-spaced candidate count")->check(CLI::Range(3, 1000000))->capture_default_str();
  fr_cmd->add_flag("--refine", fr_grid.refine, "Polish each grid argmin to the exact optimum");
  fr_cmd->add_option("--c-min", fr_range.c_min, "Closed form: lower end of the reported FLOPs range")->check(CLI::PositiveNumber);
  fr_cmd->add_option("--c-max", fr_range.c_max, "Closed form: upper end of the reported FLOPs range")->check(CLI::PositiveNumber);
  fr_cmd->add_option("--vision-p", fr_vision_p, "Late relation: slope of N_v against N");
  fr_cmd->add_option("--vision-q", fr_vision_q, "Late relation: intercept of N_v against N");
  fr_cmd->add_option("--vision-offset", fr_offset, "Late relation: vision parameter offset")->capture_default_str();
  fr_cmd->add_option("--optima", fr_optima, "Write per-budget optima as CSV to this path ('-' for stdout)");
  fr_cmd->add_option("--out", fr_out, "Output JSON path, '-' for stdout")->capture_default_str();
  fr_cmd->callback([&] {
    if (fr_method == "regression" && fr_input.empty() && fr_flops.empty()) {
      throw UsageError("frontier: regression needs --input or --flops");
    }
    if (fr_method == "regression" && fr_relation == "late" && fr_input.empty() && !(fr_vision_p && fr_vision_q)) {
      throw UsageError("frontier: the late relation needs --input with late runs or --vision-p and --vision-q");
    }
    if (fr_range.c_min >= fr_range.c_max) throw UsageError("--c-min must be below --c-max");
    action = [&] {
      const auto fit = load_fit_as<LossSurfaceFit>(fr_fit);
      const Printer p = printer();
      FrontierLaws laws;
      std::vector<FrontierOptimum> optima;
      if (fr_method == "closed-form") {
        laws = closed_form_frontier(fit, fr_range);
      } else {
        std::vector<RunRecord> runs;
        if (!fr_input.empty()) runs = fr_filter.apply(load_runs(fr_input));
        std::vector<double> budgets = fr_flops;
        if (budgets.empty()) budgets = run_flops_values(runs);
        BudgetRelation relation = BudgetRelation::early();
        if (fr_relation == "late") {
          const VisionModel vision = fr_vision_p && fr_vision_q ? VisionModel{*fr_vision_p, *fr_vision_q}
                                                                : fit_vision_linear(runs);
          relation = BudgetRelation::late(vision, fr_offset);
        }
        FrontierReport report = regress_frontier_report(fit, relation, budgets, fr_grid, resolve_threads(g));
        laws = report.laws;
        optima = std::move(report.optima);
      }
      emit(out, fr_out, fit_to_json(laws));
      if (!fr_optima.empty()) {
        std::ostringstream csv;
        csv << "flops,n_opt,d_opt,loss,at_boundary\n";
        for (const FrontierOptimum& o : optima) {
          csv << p(o.c) << ',' << p(o.n) << ',' << p(o.d) << ',' << p(o.loss) << ',' << (o.at_boundary ? 1 : 0) << '\n';
        }
        emit(out, fr_optima, csv.str());
      }
      (fr_out == "-" ? err : out) << "a=" << p(laws.n_of_c.p) << " b=" << p(laws.d_of_c.p)
                                  << " d=" << p(laws.d_of_n.p) << " ratio=" << p(laws.ratio_of_c.p)
                                  << " source=" << to_string(laws.source) << "\n";
    };
  });

  // hull
  auto* hull_cmd = app.add_subcommand("hull", "Fit L = k C^c on the lower convex hull of loss vs FLOPs");
  std::string hull_input, hull_out = "-", hull_csv;
  Filter hull_filter;
  double hull_min = kDefaultMinFlops;
  std::size_t hull_grid = kDefaultEnvelopePoints;
  hull_cmd->add_option("--input", hull_input, "Run CSV or JSON file")->required()->check(CLI::ExistingFile);
  hull_filter.attach(hull_cmd);
  hull_cmd->add_option("--min-flops", hull_min, "Fit only above this many FLOPs")->check(CLI::NonNegativeNumber)->capture_default_str();
  hull_cmd->add_option("--grid", hull_grid, "Envelope and resampling grid size")->check(CLI::Range(2, 1000000))->capture_default_str();
  hull_cmd->add_option("--hull-csv", hull_csv, "Write hull vertices as CSV to this path ('-' for stdout)");
  hull_cmd->add_option("--out", hull_out, "Output JSON path, '-' for stdout")->capture_default_str();
  hull_cmd->callback([&] {
    action = [&] {
      const auto runs = hull_filter.apply(load_runs(hull_input));
      const auto hull = frontier_points(series_from_runs(runs), hull_grid);
      const PowerLawFit law = fit_compute_law(hull, hull_min, hull_grid);
      const Printer p = printer();
      emit(out, hull_out, fit_to_json(law));
      if (!hull_csv.empty()) {
        std::ostringstream csv;
        csv << "flops,loss\n";
        for (const FlopsLoss& v : hull) csv << p(v.c) << ',' << p(v.loss) << '\n';
        emit(out, hull_csv, csv.str());
      }
      (hull_out == "-" ? err : out) << "k=" << p(law.k) << " c=" << p(law.p) << " r2=" << p(law.r_squared) << "\n";
    };
  });

  // predict
  auto* pred_cmd = app.add_subcommand("predict", "Predict loss from a fit");
  std::string pred_fit;
  double pred_n = 0, pred_d = 0, pred_s = 0;
  pred_cmd->add_option("--fit", pred_fit, "Loss-surface or sparse fit JSON")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--n", pred_n, "Model (active) parameters")->required()->check(CLI::Range(1.0, 1e30));
  pred_cmd->add_option("--d", pred_d, "Training tokens")->required()->check(CLI::Range(1.0, 1e30));
  pred_cmd->add_option("--s", pred_s, "Sparsity, for sparse fits")->check(CLI::Range(0.0, 0.999999999));
  pred_cmd->callback([&] {
    action = [&] {
      const FitDocument doc = load_fit(pred_fit);
      double loss = 0;
      if (const auto* f = std::get_if<LossSurfaceFit>(&doc)) {
        loss = predict_loss(*f, pred_n, pred_d);
      } else if (const auto* s = std::get_if<SparseLossSurfaceFit>(&doc)) {
        loss = predict_sparse_loss(*s, pred_n, pred_d, pred_s);
      } else {
        raise(ErrorCode::kSchemaMismatch, pred_fit + ": predict needs a loss-surface or sparse fit", "--fit");
      }
      out << printer()(loss) << "\n";
    };
  });

  // bootstrap
  auto* boot_cmd = app.add_subcommand("bootstrap", "Bootstrap the fit coefficients");
  std::string boot_input, boot_out = "-";
  Filter boot_filter;
  int boot_iters = 100;
  std::uint64_t boot_seed = 0;
  double boot_delta = 1e-3;
  boot_cmd->add_option("--input", boot_input, "Run CSV or JSON file")->required()->check(CLI::ExistingFile);
  boot_filter.attach(boot_cmd);
  boot_cmd->add_option("--iters", boot_iters, "Resampling iterations")->check(CLI::Range(2, 1000000))->capture_default_str();
  boot_cmd->add_option("--seed", boot_seed, "Random seed")->capture_default_str();
  boot_cmd->add_option("--delta", boot_delta, "Huber transition delta")->check(CLI::PositiveNumber)->capture_default_str();
  boot_cmd->add_option("--out", boot_out, "Output JSON path, '-' for stdout")->capture_default_str();
  boot_cmd->callback([&] {
    action = [&] {
      const auto runs = boot_filter.apply(load_runs(boot_input));
      FitConfig cfg;
      cfg.huber_delta = boot_delta;
      cfg.threads = resolve_threads(g);
      const BootstrapResult r = bootstrap(loss_points(runs), cfg, {boot_iters, boot_seed, 3});
      json coefs = json::object();
      for (BootstrapCoef c : kBootstrapCoefs) {
        coefs[std::string(to_string(c))] = {{"mean", r[c].mean}, {"std", r[c].std}};
      }
      json doc = {{"schema", "scalelab.bootstrap.v1"},
                  {"iterations", r.iterations},
                  {"seed", r.seed},
                  {"full_fit", json::parse(fit_to_json(r.full_fit))},
                  {"coefficients", coefs}};
      emit(out, boot_out, doc.dump(2) + "\n");
      const Printer p = printer();
      std::ostream& table = boot_out == "-" ? err : out;
      table << "coefficient,mean,std\n";
      for (BootstrapCoef c : kBootstrapCoefs) table << to_string(c) << ',' << p(r[c].mean) << ',' << p(r[c].std) << '\n';
    };
  });

  // sparse-fit
  auto* sp_cmd = app.add_subcommand("sparse-fit", "Fit the sparsity-aware law to MoE runs");
  std::string sp_input, sp_out = "-";
  Filter sp_filter;
  std::optional<double> sp_lambda, sp_delta_s, sp_gamma;
  double sp_delta = 1e-3;
  sp_cmd->add_option("--input", sp_input, "Run CSV or JSON file")->required()->check(CLI::ExistingFile);
  sp_filter.attach(sp_cmd);
  sp_cmd->add_option("--fix-lambda", sp_lambda, "Hold the sparsity exponent lambda fixed");
  sp_cmd->add_option("--fix-delta", sp_delta_s, "Hold the interaction exponent delta fixed");
  sp_cmd->add_option("--fix-gamma", sp_gamma, "Hold the interaction size exponent gamma fixed");
  sp_cmd->add_option("--delta", sp_delta, "Huber transition delta")->check(CLI::PositiveNumber)->capture_default_str();
  sp_cmd->add_option("--out", sp_out, "Output JSON path, '-' for stdout")->capture_default_str();
  sp_cmd->callback([&] {
    action = [&] {
      const auto runs = sp_filter.apply(load_runs(sp_input));
      SparseFitConfig cfg;
      cfg.dense.huber_delta = sp_delta;
      cfg.dense.threads = resolve_threads(g);
      cfg.fixed_lambda = sp_lambda;
      cfg.fixed_delta = sp_delta_s;
      cfg.fixed_gamma = sp_gamma;
      const SparseLossSurfaceFit f = fit_sparse(sparse_points(runs), cfg);
      emit(out, sp_out, fit_to_json(f));
      const Printer p = printer();
      (sp_out == "-" ? err : out) << "E=" << p(f.e_irr) << " A=" << p(f.a_coef) << " B=" << p(f.b_coef)
                                  << " alpha=" << p(f.alpha) << " beta=" << p(f.beta) << " lambda=" << p(f.lam)
                                  << " delta=" << p(f.delta_s) << " gamma=" << p(f.gamma) << " C=" << p(f.c_coef)
                                  << " d=" << p(f.d_coef) << " objective=" << p(f.objective) << "\n";
    };
  });

  // spec-score
  auto* ss_cmd = app.add_subcommand("spec-score", "Per-layer expert specialization scores as CSV");
  std::string ss_input, ss_metric = "entropy";
  ss_cmd->add_option("--assignments", ss_input, "Assignment CSV")->required()->check(CLI::ExistingFile);
  ss_cmd->add_option("--metric", ss_metric, "entropy|uniform")
      ->check(CLI::IsMember({"entropy", "uniform"}))
      ->capture_default_str();
  ss_cmd->callback([&] {
    action = [&] {
      const auto tables = load_assignments(ss_input);
      const auto metric = ss_metric == "entropy" ? SpecializationMetric::kEntropy : SpecializationMetric::kUniform;
      const Printer p = printer();
      out << "source,layer,score\n";
      for (const AssignmentTable& t : tables) {
        const auto scores = layer_scores(t, metric);
        for (std::size_t l = 0; l < scores.size(); ++l) out << t.source() << ',' << l << ',' << p(scores[l]) << '\n';
      }
    };
  });

  // flops
  auto* fl_cmd = app.add_subcommand("flops", "Training FLOPs of one run");
  std::string fl_arch = "early";
  double fl_n = 0, fl_d = 0, fl_frac = kDefaultVisionTokenFraction;
  std::optional<double> fl_nv;
  fl_cmd->add_option("--arch", fl_arch, "early|late|moe")->check(CLI::IsMember({"early", "late", "moe"}))->capture_default_str();
  fl_cmd->add_option("--n", fl_n, "Parameters (decoder for late, active for moe)")->required()->check(CLI::Range(1.0, 1e30));
  fl_cmd->add_option("--d", fl_d, "Training tokens")->required()->check(CLI::Range(1.0, 1e30));
  fl_cmd->add_option("--n-vision", fl_nv, "Vision encoder parameters (late)")->check(CLI::Range(0.0, 1e30));
  fl_cmd->add_option("--vision-frac", fl_frac, "Fraction of tokens seen by the vision encoder (late)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  fl_cmd->callback([&] {
    if (fl_arch == "late" && !fl_nv) throw UsageError("flops: --arch late needs --n-vision");
    action = [&] {
      double c = 0;
      if (fl_arch == "early") {
        c = early_flops(fl_n, fl_d);
      } else if (fl_arch == "moe") {
        c = moe_flops(fl_n, fl_d);
      } else {
        c = late_flops(*fl_nv, fl_n, fl_d, fl_frac);
      }
      out << printer()(c) << "\n";
    };
  });

  // eval
  auto* ev_cmd = app.add_subcommand("eval", "Prediction metrics of a fit on held-out runs");
  std::string ev_fit, ev_input;
  Filter ev_filter;
  ev_cmd->add_option("--fit", ev_fit, "Loss-surface fit JSON")->required()->check(CLI::ExistingFile);
  ev_cmd->add_option("--input", ev_input, "Run CSV or JSON file")->required()->check(CLI::ExistingFile);
  ev_filter.attach(ev_cmd);
  ev_cmd->callback([&] {
    action = [&] {
      const auto fit = load_fit_as<LossSurfaceFit>(ev_fit);
      const auto runs = ev_filter.apply(load_runs(ev_input));
      const PredictionMetrics m = evaluate(fit, loss_points(runs));
      const Printer p = printer();
      out << "mse,r_squared,mae_percent\n" << p(m.mse) << ',' << p(m.r_squared) << ',' << p(m.mae_percent) << '\n';
    };
  });

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(std::move(args));
    std::vector<const char*> merged{argc > 0 ? argv[0] : "scalelab"};
    for (const std::string& a : args) merged.push_back(a.c_str());
    app.parse(static_cast<int>(merged.size()), merged.data());
    if (action) action();
    return kExitOk;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]";
    if (!e.subject().empty()) err << " (" << e.subject() << ")";
    err << ": " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace scalelab::cli
