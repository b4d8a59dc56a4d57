#include "xmodal_cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "xmodal/xmodal.hpp"
#include "xmodal_cli/run_config.hpp"

namespace xmodal::cli {

namespace {

namespace fs = std::filesystem;

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  for (double v : parse_coefficient_list(text)) {
    if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw ConfigError("--ks entries must be positive integers, got '" + text + "'");
    ks.push_back(static_cast<std::size_t>(v));
  }
  return ks;
}

nlohmann::ordered_json recall_json(const RecallReport& report) {
  nlohmann::ordered_json j;
  auto side = [](const std::map<std::size_t, double>& m) {
    nlohmann::ordered_json s = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m) s[std::to_string(k)] = v;
    return s;
  };
  j["image_to_text"] = side(report.image_to_text);
  j["text_to_image"] = side(report.text_to_image);
  return j;
}

std::string fmt_double(double v, int precision = 17) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

// Flags shared by `train` and `sweep`; each is applied only if given, so it
// overrides the config file.
struct TrainFlags {
  std::string config_path;
  std::string loss, a, b, sim_domain, data, out;
  double mining_margin = 0, triplet_margin = 0, lr = 0, beta1 = 0, beta2 = 0, eps = 0, lr_decay = 0;
  double noise = 0;
  std::size_t embed_dim = 0, hidden_dim = 0, epochs = 0, batch_size = 0, lr_decay_epoch = 0;
  std::size_t classes = 0, per_class = 0, latent_dim = 0, visual_dim = 0, text_dim = 0;
  std::uint64_t seed = 0, data_seed = 0;
  bool no_mining = false;
  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* app) {
    opts["config"] = app->add_option("--config", config_path, "JSON run configuration");
    opts["loss"] = app->add_option("--loss", loss, "triplet | avg_poly | max_poly");
    opts["a"] = app->add_option("--a", a, "positive coefficients a_0..a_P, comma separated");
    opts["b"] = app->add_option("--b", b, "negative coefficients b_0..b_Q, comma separated");
    opts["mining_margin"] = app->add_option("--mining-margin", mining_margin, "informative-pair margin");
    opts["no_mining"] = app->add_flag("--no-mining", no_mining, "treat every negative as informative");
    opts["margin"] = app->add_option("--margin", triplet_margin, "triplet loss margin");
    opts["sim_domain"] = app->add_option("--sim-domain", sim_domain, "lo,hi interval for the weight rule");
    opts["embed_dim"] = app->add_option("--embed-dim", embed_dim, "shared embedding dimension");
    opts["hidden_dim"] = app->add_option("--hidden-dim", hidden_dim, "tanh hidden layer width (0 = linear)");
    opts["lr"] = app->add_option("--lr", lr, "Adam learning rate");
    opts["beta1"] = app->add_option("--beta1", beta1);
    opts["beta2"] = app->add_option("--beta2", beta2);
    opts["eps"] = app->add_option("--eps", eps);
    opts["lr_decay"] = app->add_option("--lr-decay", lr_decay, "learning-rate decay factor");
    opts["lr_decay_epoch"] = app->add_option("--lr-decay-epoch", lr_decay_epoch, "epoch after which to decay");
    opts["epochs"] = app->add_option("--epochs", epochs);
    opts["batch_size"] = app->add_option("--batch-size", batch_size);
    opts["seed"] = app->add_option("--seed", seed, "training seed");
    opts["data"] = app->add_option("--data", data, "XMF1 or CSV feature file (default: synthetic)");
    opts["classes"] = app->add_option("--classes", classes, "synthetic: number of classes");
    opts["per_class"] = app->add_option("--per-class", per_class, "synthetic: pairs per class");
    opts["latent_dim"] = app->add_option("--latent-dim", latent_dim, "synthetic: latent dimension");
    opts["visual_dim"] = app->add_option("--visual-dim", visual_dim, "synthetic: visual feature dimension");
    opts["text_dim"] = app->add_option("--text-dim", text_dim, "synthetic: text feature dimension");
    opts["noise"] = app->add_option("--noise", noise, "synthetic: noise sigma");
    opts["data_seed"] = app->add_option("--data-seed", data_seed, "synthetic: generator seed");
    opts["out"] = app->add_option("--out", out, "output directory");
  }

  bool given(const std::string& name) const { return opts.at(name)->count() > 0; }

  RunConfig resolve() const {
    RunConfig cfg = given("config") ? load_run_config(config_path) : RunConfig{};
    auto& t = cfg.train;
    if (given("loss")) t.loss.kind = parse_loss_kind(loss);
    if (given("a")) t.loss.coefficients.pos = parse_coefficient_list(a);
    if (given("b")) t.loss.coefficients.neg = parse_coefficient_list(b);
    if (given("mining_margin")) t.loss.coefficients.mining_margin = mining_margin;
    if (given("no_mining")) t.loss.mining_enabled = false;
    if (given("margin")) t.loss.triplet_margin = triplet_margin;
    if (given("sim_domain")) {
      const auto d = parse_coefficient_list(sim_domain);
      if (d.size() != 2) throw ConfigError("--sim-domain expects lo,hi");
      t.loss.coefficients.domain = {d[0], d[1]};
    }
    if (given("embed_dim")) t.embed_dim = embed_dim;
    if (given("hidden_dim")) t.hidden_dim = hidden_dim;
    if (given("lr")) t.adam.lr = lr;
    if (given("beta1")) t.adam.beta1 = beta1;
    if (given("beta2")) t.adam.beta2 = beta2;
    if (given("eps")) t.adam.eps = eps;
    if (given("lr_decay")) t.lr_decay = lr_decay;
    if (given("lr_decay_epoch")) t.lr_decay_epoch = lr_decay_epoch;
    if (given("epochs")) t.epochs = epochs;
    if (given("batch_size")) t.batch_size = batch_size;
    if (given("seed")) t.seed = seed;
    if (given("data")) cfg.data = fs::path(data);
    auto& s = cfg.synthetic;
    if (given("classes")) s.num_classes = classes;
    if (given("per_class")) s.pairs_per_class = per_class;
    if (given("latent_dim")) s.latent_dim = latent_dim;
    if (given("visual_dim")) s.visual_dim = visual_dim;
    if (given("text_dim")) s.text_dim = text_dim;
    if (given("noise")) s.noise_sigma = noise;
    if (given("data_seed")) s.seed = data_seed;
    if (given("out")) cfg.out = out;
    return cfg;
  }
};

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw FormatError("cannot create output directory '" + dir.string() + "'");
}

// ---------------------------------------------------------------- gen-data

struct GenDataArgs {
  SyntheticSpec spec;
  std::string out;
};

int gen_data(const GenDataArgs& args, std::ostream& out) {
  const FeaturePairSet set = generate_synthetic(args.spec);
  save_features(set, args.out);
  out << "wrote " << args.out << ": N=" << set.size() << " d1=" << set.visual_dim()
      << " d2=" << set.text_dim() << " train=" << set.count(Split::train)
      << " val=" << set.count(Split::val) << " test=" << set.count(Split::test) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- train

struct TrainOutcome {
  TrainResult result;
  std::optional<RecallReport> final_val;
};

TrainOutcome train_run(const RunConfig& cfg, const FeaturePairSet& data, std::ostream* log_stream,
                       std::ostream* echo) {
  TrainOutcome outcome;
  outcome.result = train(data, cfg.train, [&](const EpochRecord& rec) {
    const std::string line = to_json_line(rec);
    if (log_stream) *log_stream << line << '\n' << std::flush;
    if (echo) *echo << line << '\n';
  });
  if (!outcome.result.log.empty()) {
    outcome.final_val = outcome.result.log.back().val;
  } else if (data.count(Split::val) > 0) {
    outcome.final_val = evaluate(outcome.result.params, data.subset(Split::val));
  }
  return outcome;
}

int train_cmd(const TrainFlags& flags, std::ostream& out) {
  const RunConfig cfg = flags.resolve();
  validate(cfg);
  const FeaturePairSet data = resolve_dataset(cfg);
  ensure_directory(cfg.out);
  {
    std::ofstream config_file(cfg.out / "config.json", std::ios::trunc);
    config_file << run_config_to_json(cfg) << '\n';
  }
  std::ofstream log(cfg.out / "train_log.jsonl", std::ios::trunc);
  if (!log) throw FormatError("cannot write training log in '" + cfg.out.string() + "'");
  const TrainOutcome outcome = train_run(cfg, data, &log, &out);
  save_model(outcome.result.params, cfg.out / "model.json");

  nlohmann::ordered_json final;
  final["split"] = "val";
  if (outcome.final_val) {
    final["recall"] = recall_json(*outcome.final_val);
  } else {
    final["recall"] = nullptr;
  }
  out << final.dump() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string model, data, split = "test", ks = "1,5,10";
};

int eval_cmd(const EvalArgs& args, std::ostream& out) {
  if (!fs::exists(args.model)) throw ConfigError("model file '" + args.model + "' does not exist");
  if (!fs::exists(args.data)) throw ConfigError("data file '" + args.data + "' does not exist");
  const Split split = parse_split(args.split);
  const auto ks = parse_ks(args.ks);
  const EncoderParams params = load_model(args.model);
  const FeaturePairSet data = load_dataset(args.data);
  if (data.visual_dim() != params.visual_dim() || data.text_dim() != params.text_dim())
    throw ConfigError("model and data disagree on feature dimensions");
  const FeaturePairSet subset = data.subset(split);
  if (subset.size() == 0) throw ConfigError("split '" + args.split + "' is empty");
  const RecallReport report = recall_at_k(score_gallery(params, subset), ks);

  nlohmann::ordered_json j;
  j["split"] = args.split;
  j["n"] = subset.size();
  j["recall"] = recall_json(report);
  out << j.dump() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- grad-check

struct GradCheckArgs {
  std::string loss = "max_poly", a, b;
  double mining_margin = 0.2, margin = 0.2;
  bool no_mining = false, inject_bug = false;
  std::size_t trials = 100;
  std::uint64_t seed = 3;
};

int grad_check_cmd(const GradCheckArgs& args, std::ostream& out) {
  GradCheckConfig cfg;
  cfg.loss.kind = parse_loss_kind(args.loss);
  if (!args.a.empty()) cfg.loss.coefficients.pos = parse_coefficient_list(args.a);
  if (!args.b.empty()) cfg.loss.coefficients.neg = parse_coefficient_list(args.b);
  cfg.loss.coefficients.mining_margin = args.mining_margin;
  cfg.loss.triplet_margin = args.margin;
  cfg.loss.mining_enabled = !args.no_mining;
  cfg.trials = args.trials;
  cfg.seed = args.seed;
  cfg.inject_bug = args.inject_bug;

  const GradCheckReport report = run_grad_check(cfg);
  auto line = [&](const char* name, double err, double tol, bool ok) {
    out << std::left << std::setw(12) << name << "max_rel_err=" << std::setprecision(3)
        << std::scientific << err << "  tol=" << tol << "  " << (ok ? "PASS" : "FAIL") << '\n'
        << std::defaultfloat;
  };
  line("similarity", report.similarity_max_rel_err, cfg.similarity_tolerance, report.similarity_ok);
  line("loss", report.loss_max_rel_err, cfg.loss_tolerance, report.loss_ok);
  line("encoder", report.encoder_max_rel_err, cfg.encoder_tolerance, report.encoder_ok);
  out << "grad-check " << args.loss << ": " << (report.passed() ? "PASS" : "FAIL") << " ("
      << report.trials << " trials)\n";
  return report.passed() ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string b1, b2, csv;
  double b0 = 0.03;
};

int sweep_cmd(const TrainFlags& flags, const SweepArgs& args, bool b0_given, std::ostream& out) {
  RunConfig base = flags.resolve();
  const auto b1s = parse_coefficient_list(args.b1);
  const auto b2s = parse_coefficient_list(args.b2);
  const double b0 = b0_given ? args.b0 : base.train.loss.coefficients.neg.at(0);
  if (base.data && !fs::exists(*base.data))
    throw ConfigError("data file '" + base.data->string() + "' does not exist");
  const FeaturePairSet data = resolve_dataset(base);

  const fs::path csv_path = args.csv.empty() ? base.out / "sweep.csv" : fs::path(args.csv);
  if (csv_path.has_parent_path()) ensure_directory(csv_path.parent_path());
  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) throw FormatError("cannot write '" + csv_path.string() + "'");
  csv << "b1,b2,r1_i2t,r1_t2i,valid\n";

  double best_score = -std::numeric_limits<double>::infinity();
  std::string best;
  for (double b1 : b1s) {
    for (double b2 : b2s) {
      RunConfig cell = base;
      cell.train.loss.coefficients.neg = {b0, b1, b2};
      csv << fmt_double(b1) << ',' << fmt_double(b2) << ',';
      try {
        xmodal::validate(cell.train);
      } catch (const ConfigError& e) {
        csv << ",,invalid\n";
        out << "b1=" << b1 << " b2=" << b2 << ": invalid (" << e.what() << ")\n";
        continue;
      }
      const TrainOutcome outcome = train_run(cell, data, nullptr, nullptr);
      if (!outcome.final_val) throw ConfigError("sweep needs a non-empty validation split");
      const double i2t = outcome.final_val->image_to_text.at(1);
      const double t2i = outcome.final_val->text_to_image.at(1);
      csv << fmt_double(i2t) << ',' << fmt_double(t2i) << ",valid\n" << std::flush;
      out << "b1=" << b1 << " b2=" << b2 << ": R@1 i2t=" << std::fixed << std::setprecision(1) << i2t
          << " t2i=" << t2i << std::defaultfloat << std::setprecision(6) << '\n';
      if (i2t + t2i > best_score) {
        best_score = i2t + t2i;
        std::ostringstream os;
        os << "b1=" << b1 << " b2=" << b2 << " (R@1 i2t=" << std::fixed << std::setprecision(1) << i2t
           << " t2i=" << t2i << ")";
        best = os.str();
      }
    }
  }
  out << "best cell: " << (best.empty() ? std::string("none (every cell invalid)") : best) << '\n';
  out << "wrote " << csv_path.string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-modal metric learning with polynomial pair-weighting losses", "xmodal"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic paired feature file");
  gen_cmd->add_option("--classes", gen.spec.num_classes, "number of latent classes");
  gen_cmd->add_option("--per-class", gen.spec.pairs_per_class, "pairs per class");
  gen_cmd->add_option("--latent-dim", gen.spec.latent_dim);
  gen_cmd->add_option("--visual-dim", gen.spec.visual_dim);
  gen_cmd->add_option("--text-dim", gen.spec.text_dim);
  gen_cmd->add_option("--noise", gen.spec.noise_sigma, "noise sigma");
  gen_cmd->add_option("--seed", gen.spec.seed);
  gen_cmd->add_option("--out", gen.out, "output XMF1 file")->required();

  TrainFlags train_flags;
  auto* train_sub = app.add_subcommand("train", "train a dual encoder");
  train_flags.attach(train_sub);

  EvalArgs eval;
  auto* eval_sub = app.add_subcommand("eval", "Recall@K of a trained model");
  eval_sub->add_option("--model", eval.model, "model.json written by train")->required();
  eval_sub->add_option("--data", eval.data, "XMF1 or CSV feature file")->required();
  eval_sub->add_option("--split", eval.split, "train | val | test");
  eval_sub->add_option("--ks", eval.ks, "comma-separated K values");

  GradCheckArgs gc;
  auto* gc_sub = app.add_subcommand("grad-check", "finite-difference gradient verification");
  gc_sub->add_option("--loss", gc.loss);
  gc_sub->add_option("--a", gc.a);
  gc_sub->add_option("--b", gc.b);
  gc_sub->add_option("--mining-margin", gc.mining_margin);
  gc_sub->add_option("--margin", gc.margin, "triplet margin");
  gc_sub->add_flag("--no-mining", gc.no_mining);
  gc_sub->add_option("--trials", gc.trials);
  gc_sub->add_option("--seed", gc.seed);
  gc_sub->add_flag("--inject-bug", gc.inject_bug, "corrupt the analytic gradient (harness self-test)");

  TrainFlags sweep_flags;
  SweepArgs sweep;
  auto* sweep_sub = app.add_subcommand("sweep", "grid search over b1 x b2 with b0 fixed");
  sweep_flags.attach(sweep_sub);
  auto* b0_opt = sweep_sub->add_option("--b0", sweep.b0, "fixed constant term (default: config b_0)");
  sweep_sub->add_option("--b1", sweep.b1, "comma-separated b1 grid")->required();
  sweep_sub->add_option("--b2", sweep.b2, "comma-separated b2 grid")->required();
  sweep_sub->add_option("--csv", sweep.csv, "output CSV (default <out>/sweep.csv)");

  std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (gen_cmd->parsed()) return gen_data(gen, out);
    if (train_sub->parsed()) return train_cmd(train_flags, out);
    if (eval_sub->parsed()) return eval_cmd(eval, out);
    if (gc_sub->parsed()) return grad_check_cmd(gc, out);
    if (sweep_sub->parsed()) return sweep_cmd(sweep_flags, sweep, b0_opt->count() > 0, out);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace xmodal::cli
