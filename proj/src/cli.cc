#include "tsmiss/cli.h"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "tsmiss/baselines.h"
#include "tsmiss/eval.h"
#include "tsmiss/features.h"
#include "tsmiss/grud.h"
#include "tsmiss/ingest.h"
#include "tsmiss/interpret.h"
#include "tsmiss/synth.h"

namespace tsmiss::cli {

namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory '" + out.string() + "'");
}

Json manifest(const std::string& subcommand) {
  Json j;
  j["artifact_version"] = kVersion;
  j["subcommand"] = subcommand;
  return j;
}

Json data_paths(const DataOptions& d) {
  return Json{{"events", d.events.string()}, {"stays", d.stays.string()},
              {"out", d.out.string()}};
}

std::vector<Stay> load_cohort(const DataOptions& d, double age_threshold) {
  auto events_in = open_input(d.events);
  auto stays_in = open_input(d.stays);
  const auto events = parse_events(events_in);
  const auto stays = parse_stays(stays_in, age_threshold);
  auto cohort = assemble_stays(events, stays);
  if (cohort.empty()) throw DataError("cohort is empty after filtering");
  return cohort;
}

struct Split {
  std::vector<Stay> train;
  std::vector<Stay> test;
};

Split split_cohort(const std::vector<Stay>& cohort, double train_fraction,
                   std::uint64_t seed) {
  std::vector<std::string> subjects;
  subjects.reserve(cohort.size());
  for (const auto& s : cohort) subjects.push_back(s.meta.subject_id);
  const auto assignment = eval::split_by_subject(subjects, train_fraction, seed);
  Split out;
  eval::partition_stays(cohort, assignment, out.train, out.test);
  return out;
}

std::vector<int> labels_of(const std::vector<Stay>& stays) {
  std::vector<int> out;
  out.reserve(stays.size());
  for (const auto& s : stays) out.push_back(s.meta.label);
  return out;
}

void require_both_classes(const std::vector<Stay>& stays, const char* what) {
  const auto labels = labels_of(stays);
  const bool has0 = std::count(labels.begin(), labels.end(), 0) > 0;
  const bool has1 = std::count(labels.begin(), labels.end(), 1) > 0;
  if (!has0 || !has1) throw DataError(std::string(what) + " split is single-class");
}

std::vector<double> score_stays(const ModelFile& file, const std::vector<Stay>& stays) {
  std::vector<double> scores;
  scores.reserve(stays.size());
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GrudModel>) {
          for (const auto& t : build_feature_set(stays, file.stats)) {
            scores.push_back(grud::forward(m.params, t).probability);
          }
        } else {
          for (const auto& row : build_tabular_set(stays, file.stats)) {
            scores.push_back(baselines::predict_proba(m, row.features));
          }
        }
      },
      file.model);
  return scores;
}

std::string curve_csv(const std::vector<eval::CurvePoint>& points, const char* header) {
  std::ostringstream os;
  os << header << '\n';
  for (const auto& p : points) os << format_double(p.x) << ',' << format_double(p.y) << '\n';
  return os.str();
}

Json curve_json(const std::vector<eval::CurvePoint>& points) {
  Json out = Json::array();
  for (const auto& p : points) out.push_back(Json::array({p.x, p.y}));
  return out;
}

ModelFile load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model '" + path.string() + "'");
  try {
    return model_file_from_json(Json::parse(in));
  } catch (const Json::exception& e) {
    throw DataError("invalid model file '" + path.string() + "': " + e.what());
  }
}

}  // namespace

std::string model_file_name(ModelKind kind) {
  return "model_" + model_kind_name(kind) + ".json";
}

std::string loss_history_file_name(ModelKind kind) {
  return "loss_history_" + model_kind_name(kind) + ".csv";
}

void cmd_synth(const SynthOptions& o) {
  auto config = synth::missingness_only_scenario();
  if (o.config) config = synth_config_from_json(read_json(*o.config), config);
  if (o.seed) config.seed = *o.seed;
  config.validate();

  const auto data = synth::generate(config);
  prepare_out(o.out);
  write_file(o.out / kEventsFile, data.events_csv);
  write_file(o.out / kStaysFile, data.stays_csv);

  Json m = manifest("synth");
  m["config_path"] = o.config ? o.config->string() : "";
  m["config"] = to_json(config);
  m["seeds"] = Json{{"synth", config.seed}};
  m["outputs"] = Json::array({kEventsFile, kStaysFile});
  m["out"] = o.out.string();
  write_file(o.out / "manifest_synth.json", dump(m));
}

void cmd_stats(const StatsOptions& o) {
  const auto cohort = load_cohort(o.data, o.age_threshold);
  const auto table = eval::cohort_table(cohort);
  prepare_out(o.data.out);
  write_file(o.data.out / kCohortFile, eval::cohort_table_csv(table));

  Json m = manifest("stats");
  m["paths"] = data_paths(o.data);
  m["age_threshold"] = o.age_threshold;
  m["outputs"] = Json::array({kCohortFile});
  write_file(o.data.out / "manifest_stats.json", dump(m));
}

void cmd_train(const TrainOptions& o) {
  ModelConfig config;
  if (o.config) config = model_config_from_json(read_json(*o.config));
  config.grud.seed = o.seed;

  const auto cohort = load_cohort(o.data, o.age_threshold);
  const auto split = split_cohort(cohort, o.train_fraction, o.seed);
  if (split.train.empty()) throw DataError("training split is empty");
  require_both_classes(split.train, "training");

  ModelFile file;
  file.seed = o.seed;
  file.train_fraction = o.train_fraction;
  file.age_threshold = o.age_threshold;
  file.stats = fit_scaler(split.train);

  std::vector<std::string> outputs = {model_file_name(o.model)};
  prepare_out(o.data.out);
  switch (o.model) {
    case ModelKind::kGrud: {
      const auto tensors = build_feature_set(split.train, file.stats);
      auto result = grud::train(config.grud, tensors);
      GrudModel m{result.params, config.grud, result.initial_loss, result.epoch_loss};
      std::ostringstream hist;
      hist << "epoch,mean_loss\n";
      for (std::size_t e = 0; e < m.epoch_loss.size(); ++e) {
        hist << e + 1 << ',' << format_double(m.epoch_loss[e]) << '\n';
      }
      write_file(o.data.out / loss_history_file_name(o.model), hist.str());
      outputs.push_back(loss_history_file_name(o.model));
      file.model = std::move(m);
      break;
    }
    case ModelKind::kLogReg: {
      const auto rows = build_tabular_set(split.train, file.stats);
      file.model = baselines::fit_logreg(rows, config.logreg);
      break;
    }
    case ModelKind::kStumps: {
      const auto rows = build_tabular_set(split.train, file.stats);
      auto ensemble = baselines::fit_stumps(rows, config.stumps);
      if (ensemble.stopped_early) {
        std::cerr << "stumps: no loss reduction after " << ensemble.stumps.size()
                  << " stages, stopped early\n";
      }
      file.model = std::move(ensemble);
      break;
    }
  }
  write_file(o.data.out / model_file_name(o.model), dump(to_json(file)));

  Json m = manifest("train");
  m["paths"] = data_paths(o.data);
  m["config_path"] = o.config ? o.config->string() : "";
  m["model"] = model_kind_name(o.model);
  m["seeds"] = Json{{"run", o.seed},
                    {"split", derive_seed(o.seed, SeedStream::kSplit)},
                    {"grud_init", derive_seed(o.seed, SeedStream::kGrudInit)},
                    {"grud_shuffle", derive_seed(o.seed, SeedStream::kGrudShuffle)}};
  m["age_threshold"] = o.age_threshold;
  m["train_frac"] = o.train_fraction;
  m["n_train_stays"] = split.train.size();
  m["n_test_stays"] = split.test.size();
  Json resolved;
  resolved["grud"] = to_json(config.grud);
  resolved["logreg"] = Json{{"penalty_c", config.logreg.penalty_c},
                            {"tolerance", config.logreg.tolerance},
                            {"max_iterations", config.logreg.max_iterations}};
  resolved["stumps"] = Json{{"n_estimators", config.stumps.n_estimators},
                            {"shrinkage", config.stumps.shrinkage}};
  m["config"] = resolved;
  m["outputs"] = outputs;
  write_file(o.data.out / ("manifest_train_" + model_kind_name(o.model) + ".json"), dump(m));
}

void cmd_evaluate(const EvaluateOptions& o) {
  if (o.models.empty()) throw ConfigError("evaluate needs at least one model file");
  std::vector<ModelFile> models;
  std::set<ModelKind> kinds;
  for (const auto& path : o.models) {
    models.push_back(load_model(path));
    if (!kinds.insert(models.back().kind()).second) {
      throw DataError("duplicate model kind '" + model_kind_name(models.back().kind()) + "'");
    }
  }
  const ModelFile& ref = models.front();
  for (std::size_t i = 1; i < models.size(); ++i) {
    if (models[i].seed != ref.seed || models[i].train_fraction != ref.train_fraction ||
        models[i].age_threshold != ref.age_threshold) {
      throw DataError("split mismatch: '" + o.models[i].string() +
                      "' was trained with a different seed, train_frac or age threshold "
                      "than '" + o.models[0].string() + "'");
    }
  }

  const auto cohort = load_cohort(o.data, ref.age_threshold);
  const auto split = split_cohort(cohort, ref.train_fraction, ref.seed);
  require_both_classes(split.test, "test");
  const auto labels = labels_of(split.test);

  prepare_out(o.data.out);
  Json report;
  report["format_version"] = kFormatVersion;
  report["bootstrap_seed"] = o.seed;
  report["split_seed"] = ref.seed;
  report["train_frac"] = ref.train_fraction;
  report["n_test_stays"] = split.test.size();
  report["n_bootstrap_replicates"] = eval::kBootstrapReplicates;
  Json entries = Json::object();
  std::vector<std::string> outputs = {kReportFile};
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto kind = model_kind_name(models[i].kind());
    const auto scores = score_stays(models[i], split.test);
    const auto roc = eval::roc_curve(scores, labels);
    const auto pr = eval::pr_curve(scores, labels);
    const std::string roc_file = "roc_" + kind + ".csv";
    const std::string pr_file = "pr_" + kind + ".csv";
    write_file(o.data.out / roc_file, curve_csv(roc, "fpr,tpr"));
    write_file(o.data.out / pr_file, curve_csv(pr, "recall,precision"));
    outputs.push_back(roc_file);
    outputs.push_back(pr_file);

    Json e;
    e["model_file"] = o.models[i].filename().string();
    e["auroc"] = to_json(eval::bootstrap_ci(eval::auroc, scores, labels,
                                            eval::kBootstrapReplicates, o.seed));
    e["auprc"] = to_json(eval::bootstrap_ci(eval::auprc, scores, labels,
                                            eval::kBootstrapReplicates, o.seed));
    e["roc_curve"] = curve_json(roc);
    e["pr_curve"] = curve_json(pr);
    entries[kind] = e;
  }
  report["models"] = entries;
  write_file(o.data.out / kReportFile, dump(report));

  Json m = manifest("evaluate");
  m["paths"] = data_paths(o.data);
  Json model_paths = Json::array();
  for (const auto& p : o.models) model_paths.push_back(p.string());
  m["models"] = model_paths;
  m["seeds"] = Json{{"bootstrap", o.seed}, {"split", ref.seed}};
  m["outputs"] = outputs;
  write_file(o.data.out / "manifest_evaluate.json", dump(m));
}

void cmd_interpret(const InterpretOptions& o) {
  const ModelFile file = load_model(o.model);
  const auto* g = std::get_if<GrudModel>(&file.model);
  if (!g) {
    throw DataError("interpret requires a GRU-D model, got '" +
                    model_kind_name(file.kind()) + "'");
  }
  const auto cohort = load_cohort(o.data, file.age_threshold);
  const auto split = split_cohort(cohort, file.train_fraction, file.seed);
  if (split.test.empty()) throw DataError("test split is empty");

  const auto tensors = build_feature_set(split.test, file.stats);
  const auto traces = interpret::collect_traces(g->params, tensors);
  const auto summary = interpret::summarize_decays(traces);

  prepare_out(o.data.out);
  Json j = to_json(summary);
  j["split"] = "test";
  write_file(o.data.out / kDecayJsonFile, dump(j));
  write_file(o.data.out / kDecayCsvFile, interpret::decay_summary_csv(summary));

  Json m = manifest("interpret");
  m["paths"] = data_paths(o.data);
  m["model"] = o.model.string();
  m["seeds"] = Json{{"split", file.seed}};
  m["outputs"] = Json::array({kDecayJsonFile, kDecayCsvFile});
  write_file(o.data.out / "manifest_interpret.json", dump(m));
}

int run(int argc, const char* const* argv) {
  CLI::App app{"GRU-D and tabular baselines for informative missingness in vital-sign series",
               "tsmiss"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SynthOptions synth_o;
  std::string synth_config, synth_out;
  std::uint64_t synth_seed = 42;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth_cmd->add_option("--config", synth_config, "Synth config JSON")->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  auto* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed, "Run seed (default 42)");

  auto add_data = [](CLI::App* cmd, std::string& events, std::string& stays,
                     std::string& out) {
    cmd->add_option("--events", events, "Events CSV")->required();
    cmd->add_option("--stays", stays, "Stays CSV")->required();
    cmd->add_option("--out", out, "Output directory")->required();
  };

  StatsOptions stats_o;
  std::string st_events, st_stays, st_out;
  auto* stats_cmd = app.add_subcommand("stats", "Cohort characteristics table");
  add_data(stats_cmd, st_events, st_stays, st_out);
  stats_cmd->add_option("--age-threshold", stats_o.age_threshold, "Label threshold in years")
      ->capture_default_str();

  TrainOptions train_o;
  std::string tr_events, tr_stays, tr_out, tr_model, tr_config;
  auto* train_cmd = app.add_subcommand("train", "Train one model");
  add_data(train_cmd, tr_events, tr_stays, tr_out);
  train_cmd->add_option("--model", tr_model, "grud | logreg | stumps")
      ->required()
      ->check(CLI::IsMember({"grud", "logreg", "stumps"}));
  train_cmd->add_option("--config", tr_config, "Model config JSON")->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", train_o.seed, "Run seed")->capture_default_str();
  train_cmd->add_option("--age-threshold", train_o.age_threshold, "Label threshold in years")
      ->capture_default_str();
  train_cmd->add_option("--train-frac", train_o.train_fraction, "Train fraction of subjects")
      ->capture_default_str();

  EvaluateOptions eval_o;
  std::string ev_events, ev_stays, ev_out;
  std::vector<std::string> ev_models;
  auto* eval_cmd = app.add_subcommand("evaluate", "Bootstrap-evaluate trained models");
  eval_cmd->add_option("models", ev_models, "Model JSON files")->required();
  add_data(eval_cmd, ev_events, ev_stays, ev_out);
  eval_cmd->add_option("--seed", eval_o.seed, "Bootstrap seed")->capture_default_str();

  InterpretOptions interp_o;
  std::string in_events, in_stays, in_out, in_model;
  auto* interp_cmd = app.add_subcommand("interpret", "Summarize learned GRU-D decay rates");
  interp_cmd->add_option("model", in_model, "GRU-D model JSON")->required();
  add_data(interp_cmd, in_events, in_stays, in_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth_cmd) {
      if (!synth_config.empty()) synth_o.config = synth_config;
      synth_o.out = synth_out;
      if (synth_seed_opt->count() > 0) synth_o.seed = synth_seed;
      cmd_synth(synth_o);
    } else if (*stats_cmd) {
      stats_o.data = {st_events, st_stays, st_out};
      cmd_stats(stats_o);
    } else if (*train_cmd) {
      train_o.data = {tr_events, tr_stays, tr_out};
      train_o.model = model_kind_from_name(tr_model);
      if (!tr_config.empty()) train_o.config = tr_config;
      if (!(train_o.train_fraction > 0.0 && train_o.train_fraction < 1.0)) {
        throw ConfigError("--train-frac must lie strictly between 0 and 1");
      }
      cmd_train(train_o);
    } else if (*eval_cmd) {
      eval_o.data = {ev_events, ev_stays, ev_out};
      eval_o.models.assign(ev_models.begin(), ev_models.end());
      cmd_evaluate(eval_o);
    } else if (*interp_cmd) {
      interp_o.data = {in_events, in_stays, in_out};
      interp_o.model = in_model;
      cmd_interpret(interp_o);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace tsmiss::cli
