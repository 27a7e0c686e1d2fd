/*
 * Copyright 2026 The celldx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line driver: synth, schema, corrupt, train, evaluate, explain, serve,
// experiment. Exit codes: 0 success, 1 I/O or internal error, 2 validation
// error, 3 numeric divergence.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "celldx/checkpoint.h"
#include "celldx/corruptor.h"
#include "celldx/error.h"
#include "celldx/experiment.h"
#include "celldx/explainer.h"
#include "celldx/metrics.h"
#include "celldx/models.h"
#include "celldx/schema.h"
#include "celldx/service.h"
#include "celldx/synthetic.h"
#include "celldx/table.h"

// After Eigen: resolv.h defines a _res macro.
#include "httplib.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace celldx {
namespace {

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDivergence:
    case ErrorCode::kEmDegenerate:
      return kExitDivergence;
    case ErrorCode::kIo:
      return kExitIo;
    default:
      return kExitValidation;
  }
}

void RequireFile(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::kIo, "no such file: " + path.string());
  }
}

void WriteJson(const json& doc, const fs::path& path) { WriteFile(path, doc.dump(2) + "\n"); }

// Kinds come from --schema when given, otherwise from inference over `data`.
// Standardization statistics are always refit on `data` unless the schema
// file is already fitted and `refit` is false.
Schema ResolveSchema(const RawTable& data, const std::string& schema_path,
                     const std::string& kinds, bool refit) {
  if (!schema_path.empty()) {
    RequireFile(schema_path);
    Schema s = SchemaFromJson(json::parse(ReadFile(schema_path)));
    CheckTableMatchesSchema(data, s);
    if (!refit && s.is_fitted()) return s;
    return FitEncoder(data, s);
  }
  return FitEncoder(data, InferSchema(data, ParseKindOverrides(kinds)));
}

std::vector<NoiseFamily> ParseFamilies(const std::vector<std::string>& names) {
  std::vector<NoiseFamily> out;
  for (const auto& n : names) {
    if (n == "gaussian") out.push_back(NoiseFamily::kGaussian);
    else if (n == "laplace") out.push_back(NoiseFamily::kLaplace);
    else if (n == "lognormal") out.push_back(NoiseFamily::kLogNormal);
    else throw Error(ErrorCode::kPrecondition, "unknown noise family '" + n + "'");
  }
  return out;
}

std::vector<CategoricalMode> ParseModes(const std::vector<std::string>& names) {
  std::vector<CategoricalMode> out;
  for (const auto& n : names) {
    if (n == "swap") out.push_back(CategoricalMode::kSwapCategory);
    else if (n == "typo") out.push_back(CategoricalMode::kTypoSynthesis);
    else throw Error(ErrorCode::kPrecondition, "unknown categorical mode '" + n + "'");
  }
  return out;
}

struct CorruptionFlags {
  double fraction = 0.03;
  double gamma_low = 3.0;
  double gamma_high = 5.0;
  std::vector<std::string> families = {"gaussian", "laplace", "lognormal"};
  std::vector<std::string> modes = {"swap", "typo"};

  void Add(CLI::App* app, const std::string& prefix = "") {
    app->add_option("--" + prefix + "fraction", fraction, "Fraction of rows to corrupt")
        ->capture_default_str();
    app->add_option("--gamma-low", gamma_low, "Lower bound of the noise scale factor")
        ->capture_default_str();
    app->add_option("--gamma-high", gamma_high, "Upper bound of the noise scale factor")
        ->capture_default_str();
    app->add_option("--noise-families", families, "gaussian, laplace, lognormal")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--categorical-modes", modes, "swap, typo")
        ->delimiter(',')
        ->capture_default_str();
  }

  CorruptionConfig Build(std::uint64_t seed) const {
    CorruptionConfig c;
    c.row_fraction = fraction;
    c.gamma_low = gamma_low;
    c.gamma_high = gamma_high;
    c.noise_families = ParseFamilies(families);
    c.categorical_modes = ParseModes(modes);
    c.seed = seed;
    c.Validate();
    return c;
  }
};

struct TrainFlags {
  std::size_t epochs = 5000;
  std::size_t batch = 128;
  double lr = 1e-3;
  std::vector<std::size_t> hidden = {128, 64};

  void Add(CLI::App* app) {
    app->add_option("--epochs", epochs, "Maximum training epochs")
        ->envname("CELLDX_EPOCHS")
        ->capture_default_str();
    app->add_option("--batch-size", batch, "Mini-batch size")->capture_default_str();
    app->add_option("--lr", lr, "Base learning rate")->capture_default_str();
    app->add_option("--hidden", hidden, "Encoder hidden widths, bottleneck last")
        ->delimiter(',')
        ->capture_default_str();
  }

  TrainConfig Build(std::uint64_t seed) const {
    TrainConfig t;
    t.max_epochs = epochs;
    t.batch_size = batch;
    t.base_lr = lr;
    t.hidden = hidden;
    t.seed = seed;
    t.Validate();
    return t;
  }
};

RankBy ParseRanking(const std::string& s) {
  if (s == "confidence") return RankBy::kConfidence;
  if (s == "loss") return RankBy::kLoss;
  throw Error(ErrorCode::kPrecondition, "ranking must be 'confidence' or 'loss'");
}

std::string FormatMetric(double v) { return std::isnan(v) ? "NA" : FormatReal(v); }

void PrintReport(const EvalReport& r) {
  std::cout << r.model << " seed=" << r.seed << " K=" << r.k << " P@K=" << FormatMetric(r.p_at_k)
            << " mAP_cat=" << FormatMetric(r.map_categorical)
            << " mAP_num=" << FormatMetric(r.map_numeric)
            << " mEV_cat=" << FormatMetric(r.mev_categorical)
            << " mEV_num_log=" << FormatMetric(r.mev_numeric_log) << "\n";
}

void PrintAggregates(const std::vector<AggregateReport>& aggs) {
  auto pm = [](const MetricSummary& m) {
    return FormatMetric(m.mean) + " +- " + FormatMetric(m.std_dev);
  };
  for (const auto& a : aggs) {
    std::cout << a.model << " (" << a.runs << " runs)"
              << "  P@K " << pm(a.p_at_k) << "  mAP_cat " << pm(a.map_categorical)
              << "  mAP_num " << pm(a.map_numeric) << "  mEV_cat " << pm(a.mev_categorical)
              << "  mEV_num_log " << pm(a.mev_numeric_log) << "\n";
  }
}

httplib::Server* g_server = nullptr;

void StopServer(int) {
  if (g_server) g_server->stop();
}

}  // namespace
}  // namespace celldx

int main(int argc, char** argv) {
  using namespace celldx;

  CLI::App app{"celldx: cell-level anomaly detection for mixed-type tables"};
  app.set_config("--config", "", "Flat key = value config file mirroring the flags");
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Random seed")->envname("CELLDX_SEED")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic mixed-type table");
  SyntheticSpec synth_spec;
  std::string synth_out;
  synth->add_option("--rows", synth_spec.rows)->capture_default_str();
  synth->add_option("--categorical", synth_spec.categorical)->capture_default_str();
  synth->add_option("--categories", synth_spec.categories)->capture_default_str();
  synth->add_option("--numeric", synth_spec.numeric)->capture_default_str();
  synth->add_option("--latent-dim", synth_spec.latent_dim)->capture_default_str();
  synth->add_option("-o,--out", synth_out, "Output CSV")->required();

  // schema
  auto* schema_cmd = app.add_subcommand("schema", "Infer and fit a schema");
  std::string data_path, schema_path, kinds;
  std::string out_path;
  schema_cmd->add_option("-d,--data", data_path, "Input CSV")->required()->envname("CELLDX_DATA");
  schema_cmd->add_option("--kinds", kinds, "Kind overrides, e.g. a:cat,b:num");
  schema_cmd->add_option("-o,--out", out_path, "Schema JSON")->required();

  // corrupt
  auto* corrupt = app.add_subcommand("corrupt", "Inject synthetic cell errors");
  std::string out_dir;
  CorruptionFlags corrupt_flags;
  corrupt->add_option("-d,--data", data_path, "Clean CSV")->required()->envname("CELLDX_DATA");
  corrupt->add_option("--schema", schema_path, "Schema JSON (inferred when absent)");
  corrupt->add_option("--kinds", kinds, "Kind overrides when inferring");
  corrupt->add_option("-o,--out-dir", out_dir, "Directory for corrupted/mask/originals CSVs")
      ->required();
  corrupt_flags.Add(corrupt);

  // train
  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  std::string kind_name = "dae", loss_name;
  std::string checkpoint_path;
  std::size_t pca_components = 0, gmm_components = 5, log_every = 50;
  TrainFlags train_flags;
  CorruptionFlags noise_flags;
  std::string regime = "clean";
  train->add_option("-d,--data", data_path, "Training CSV")->required()->envname("CELLDX_DATA");
  train->add_option("--schema", schema_path, "Schema JSON (kinds; statistics refit on data)");
  train->add_option("--kinds", kinds, "Kind overrides when inferring");
  train->add_option("--kind", kind_name, "dae, dae_enhanced, ae, pca, marginals")
      ->capture_default_str();
  train->add_option("--loss", loss_name, "plain or enhanced (DAE only)");
  train->add_option("-o,--out", checkpoint_path, "Checkpoint JSON")->required();
  train->add_option("--pca-components", pca_components, "0 selects 90% explained variance")
      ->capture_default_str();
  train->add_option("--gmm-components", gmm_components, "Largest mixture size for BIC")
      ->capture_default_str();
  train->add_option("--log-every", log_every, "Epoch interval of the progress log (0 disables)")
      ->capture_default_str();
  train->add_option("--regime", regime, "Provenance note, e.g. clean or dirty")
      ->capture_default_str();
  train_flags.Add(train);
  noise_flags.Add(train, "noise-");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score checkpoints against ground truth");
  std::vector<std::string> checkpoints;
  std::string mask_path, originals_path, ranking = "confidence";
  evaluate->add_option("-c,--checkpoint", checkpoints, "One or more checkpoints")->required();
  evaluate->add_option("-d,--data", data_path, "Corrupted CSV")->required();
  evaluate->add_option("--mask", mask_path, "mask.csv")->required();
  evaluate->add_option("--originals", originals_path, "originals.csv")->required();
  evaluate->add_option("-o,--out-dir", out_dir, "Report directory")->required();
  evaluate->add_option("--ranking", ranking, "confidence or loss")->capture_default_str();

  // explain
  auto* explain = app.add_subcommand("explain", "Explain one row as JSON");
  std::size_t row = 0;
  std::string checkpoint_one;
  explain->add_option("-c,--checkpoint", checkpoint_one)->required();
  explain->add_option("-d,--data", data_path, "CSV holding the row and the neighbor pool")
      ->required();
  explain->add_option("--row", row, "Zero-based row index")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the screening HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("-c,--checkpoint", checkpoint_one)->required();
  serve->add_option("-d,--data", data_path)->required();
  serve->add_option("--host", host)->envname("CELLDX_HOST")->capture_default_str();
  serve->add_option("--port", port)->envname("CELLDX_PORT")->capture_default_str();

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run the multi-model benchmark");
  ExperimentSpec spec;
  std::vector<std::string> models = kAllExperimentModels;
  std::vector<std::uint64_t> seeds = spec.seeds;
  std::size_t subsample = 0;
  TrainFlags exp_train;
  CorruptionFlags exp_noise;
  double test_fraction = 0.03, train_dirty_fraction = 0.03;
  experiment->add_option("-d,--data", data_path)->required()->envname("CELLDX_DATA");
  experiment->add_option("--kinds", kinds, "Kind overrides");
  experiment->add_option("--models", models)->delimiter(',')->capture_default_str();
  experiment->add_option("--seeds", seeds)->delimiter(',')->capture_default_str();
  experiment->add_option("--subsample", subsample, "Rows to keep (0 keeps all)");
  experiment->add_option("--train-fraction", spec.train_fraction)->capture_default_str();
  experiment->add_option("--test-fraction", test_fraction, "Corrupted fraction of test rows")
      ->capture_default_str();
  experiment->add_option("--dirty-fraction", train_dirty_fraction,
                         "Corrupted fraction of the dirty training split")
      ->capture_default_str();
  experiment->add_option("--pca-components", spec.pca_components)->capture_default_str();
  experiment->add_option("--ranking", ranking)->capture_default_str();
  experiment->add_option("-o,--out-dir", out_dir)->required();
  exp_train.Add(experiment);
  exp_noise.Add(experiment, "noise-");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*synth) {
      synth_spec.seed = seed;
      WriteCsv(GenerateSynthetic(synth_spec), synth_out);
    } else if (*schema_cmd) {
      RequireFile(data_path);
      const RawTable data = ReadCsv(data_path);
      WriteJson(SchemaToJson(ResolveSchema(data, "", kinds, true)), out_path);
    } else if (*corrupt) {
      RequireFile(data_path);
      const RawTable data = ReadCsv(data_path);
      const Schema schema = ResolveSchema(data, schema_path, kinds, false);
      const CorruptedTable out = CorruptTable(data, schema, corrupt_flags.Build(seed));
      fs::create_directories(out_dir);
      const fs::path dir(out_dir);
      WriteCsv(out.table, dir / "corrupted.csv");
      WriteCsv(MaskToTable(out.mask, data.header()), dir / "mask.csv");
      WriteCsv(OriginalsToTable(out.originals, data.header()), dir / "originals.csv");
      std::cerr << "corrupted " << out.mask.num_flagged_rows() << " rows, "
                << out.mask.num_flagged_cells() << " cells\n";
    } else if (*train) {
      RequireFile(data_path);
      const RawTable data = ReadCsv(data_path);
      const Schema schema = ResolveSchema(data, schema_path, kinds, true);
      ModelKind kind = ParseModelKind(kind_name);
      LossMode loss = kind == ModelKind::kDaeEnhanced ? LossMode::kEnhanced : LossMode::kPlain;
      if (!loss_name.empty()) {
        if (loss_name == "enhanced") loss = LossMode::kEnhanced;
        else if (loss_name == "plain") loss = LossMode::kPlain;
        else throw Error(ErrorCode::kPrecondition, "loss must be 'plain' or 'enhanced'");
        if (kind != ModelKind::kDae && kind != ModelKind::kDaeEnhanced) {
          throw Error(ErrorCode::kPrecondition, "--loss applies to DAE kinds only");
        }
      }
      const TrainConfig cfg = train_flags.Build(seed);
      const EpochCallback log = [&](std::size_t epoch, double mean_loss) {
        if (log_every != 0 && (epoch % log_every == 0 || epoch + 1 == cfg.max_epochs)) {
          std::cerr << "epoch " << epoch << " loss " << FormatReal(mean_loss) << "\n";
        }
      };
      TrainedModel model;
      switch (kind) {
        case ModelKind::kDae:
        case ModelKind::kDaeEnhanced:
          model = TrainDae(Encode(data, schema), schema, noise_flags.Build(seed), loss, cfg, log);
          break;
        case ModelKind::kAe:
          model = TrainAe(Encode(data, schema), schema, cfg, log);
          break;
        case ModelKind::kPca:
          model = FitPcaModel(Encode(data, schema), schema, pca_components);
          break;
        case ModelKind::kMarginals:
          model = FitMarginals(data, schema, gmm_components, seed);
          break;
      }
      model.provenance.regime = regime;
      SaveCheckpoint(model, checkpoint_path);
    } else if (*evaluate) {
      for (const auto& p : {data_path, mask_path, originals_path}) RequireFile(p);
      const RawTable corrupted = ReadCsv(data_path);
      std::vector<TrainedModel> models;
      for (const auto& c : checkpoints) {
        RequireFile(c);
        models.push_back(LoadCheckpoint(c));
        CheckTableMatchesSchema(corrupted, models.back().schema);
      }
      GroundTruth truth;
      truth.mask = MaskFromTable(ReadCsv(mask_path));
      truth.originals = OriginalsFromTable(ReadCsv(originals_path), corrupted.header());
      const RankBy rank = ParseRanking(ranking);
      std::vector<EvalReport> reports;
      for (const auto& m : models) {
        reports.push_back(Evaluate(m, corrupted, truth, rank));
        PrintReport(reports.back());
      }
      fs::create_directories(out_dir);
      const fs::path dir(out_dir);
      json docs = json::array();
      for (const auto& r : reports) docs.push_back(ReportToJson(r));
      WriteJson(docs, dir / "report.json");
      WriteCsv(ReportsToTable(reports), dir / "report.csv");
      const auto aggs = Aggregate(reports);
      json agg_docs = json::array();
      for (const auto& a : aggs) agg_docs.push_back(AggregateToJson(a));
      WriteJson(agg_docs, dir / "aggregate.json");
      WriteCsv(AggregatesToTable(aggs), dir / "aggregate.csv");
      if (reports.size() > 1) PrintAggregates(aggs);
      if (truth.mask.num_flagged_cells() == 0) {
        std::cerr << "mask is empty: ranking metrics are not applicable\n";
      }
    } else if (*explain) {
      RequireFile(checkpoint_one);
      RequireFile(data_path);
      const auto session = BuildSession(LoadCheckpoint(checkpoint_one), ReadCsv(data_path));
      if (row >= session->data.num_rows()) {
        throw Error(ErrorCode::kPrecondition, "row " + std::to_string(row) + " out of range");
      }
      const Explanation e = Explain(session->model, session->data.row(row), session->index, row,
                                    row, &session->map);
      std::cout << ExplanationToJson(e).dump(2) << "\n";
    } else if (*serve) {
      RequireFile(checkpoint_one);
      RequireFile(data_path);
      Service service;
      service.BuildAsync([&] { return BuildSession(LoadCheckpoint(checkpoint_one), ReadCsv(data_path)); });
      httplib::Server server;
      service.Mount(server);
      g_server = &server;
      std::signal(SIGINT, StopServer);
      std::signal(SIGTERM, StopServer);
      std::cerr << "listening on http://" << host << ":" << port << "\n";
      if (!server.listen(host, port)) {
        throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
      }
      service.WaitUntilBuilt();
    } else if (*experiment) {
      RequireFile(data_path);
      spec.dataset = data_path;
      spec.overrides = ParseKindOverrides(kinds);
      spec.models = models;
      spec.seeds = seeds;
      if (subsample != 0) spec.subsample_rows = subsample;
      spec.split_seed = seed;
      spec.test_corruption = exp_noise.Build(seed);
      spec.test_corruption.row_fraction = test_fraction;
      spec.train_corruption = exp_noise.Build(seed);
      spec.train_corruption.row_fraction = train_dirty_fraction;
      spec.dae_corruption = exp_noise.Build(seed);
      spec.train = exp_train.Build(seed);
      spec.ranking = ParseRanking(ranking);
      const ExperimentResult result =
          RunExperiment(spec, [](const std::string& m) { std::cerr << m << "\n"; });
      for (const auto& r : result.reports) PrintReport(r);
      PrintAggregates(result.aggregates);
      fs::create_directories(out_dir);
      const fs::path dir(out_dir);
      WriteCsv(ReportsToTable(result.reports), dir / "report.csv");
      WriteCsv(AggregatesToTable(result.aggregates), dir / "aggregate.csv");
      json agg_docs = json::array();
      for (const auto& a : result.aggregates) agg_docs.push_back(AggregateToJson(a));
      WriteJson(agg_docs, dir / "aggregate.json");
    }
  } catch (const Error& e) {
    std::cerr << "celldx: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "celldx: malformed JSON: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "celldx: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
