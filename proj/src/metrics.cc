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

#include "celldx/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "celldx/error.h"

namespace celldx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool SameReal(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

bool SameReals(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!SameReal(a[i], b[i])) return false;
  }
  return true;
}

double MeanOf(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

bool operator==(const EvalReport& a, const EvalReport& b) {
  return a.model == b.model && a.seed == b.seed && a.ranking == b.ranking && a.k == b.k &&
         SameReal(a.p_at_k, b.p_at_k) && SameReal(a.map_categorical, b.map_categorical) &&
         SameReal(a.map_numeric, b.map_numeric) && SameReal(a.mev_categorical, b.mev_categorical) &&
         SameReal(a.mev_numeric_log, b.mev_numeric_log) && a.attributes == b.attributes &&
         SameReals(a.ap, b.ap) && SameReals(a.ev, b.ev);
}

double PrecisionAtK(const std::vector<bool>& truth, std::span<const double> scores, std::size_t k) {
  if (truth.size() != scores.size()) throw Error(ErrorCode::kShapeMismatch, "label/score length mismatch");
  if (k == 0) throw Error(ErrorCode::kPrecondition, "k must be >= 1");
  std::size_t tp = 0;
  for (std::size_t i : TopK(scores, k)) tp += truth[i] ? 1 : 0;
  return static_cast<double>(tp) / static_cast<double>(k);
}

double AveragePrecision(std::span<const double> scores, const std::vector<bool>& labels) {
  if (labels.size() != scores.size()) throw Error(ErrorCode::kShapeMismatch, "label/score length mismatch");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  if (positives == 0) throw Error(ErrorCode::kNoPositives, "no positive labels");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] ? tp : fp) += 1;
      ++i;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

double ExpectedValueErrorNumeric(std::span<const double> originals,
                                 std::span<const double> reconstructions, double sigma) {
  if (originals.size() != reconstructions.size() || originals.empty()) {
    throw Error(ErrorCode::kPrecondition, "need matching, non-empty value lists");
  }
  if (!(sigma > 0.0)) throw Error(ErrorCode::kPrecondition, "sigma must be positive");
  double s = 0.0;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    const double r = originals[i] - reconstructions[i];
    s += r * r;
  }
  return s / (static_cast<double>(originals.size()) * sigma * sigma);
}

double ExpectedValueErrorCategorical(const Matrix& truth, const Matrix& predicted) {
  if (truth.rows() != predicted.rows() || truth.cols() != predicted.cols() || truth.rows() == 0) {
    throw Error(ErrorCode::kPrecondition, "need matching, non-empty span matrices");
  }
  return (truth - predicted).squaredNorm() / (2.0 * static_cast<double>(truth.rows()));
}

EvalReport Evaluate(const TrainedModel& model, const RawTable& corrupted, const GroundTruth& truth,
                    RankBy ranking) {
  const Schema& schema = model.schema;
  CheckTableMatchesSchema(corrupted, schema);
  if (truth.mask.rows() != corrupted.num_rows() || truth.mask.attributes() != schema.size()) {
    throw Error(ErrorCode::kShapeMismatch, "mask does not match the evaluated table");
  }
  const Layout layout = Layout::FromSchema(schema);
  const EncodedMatrix enc = Encode(corrupted, schema);
  const ScoredBatch scored = ScoreBatch(model, enc.values);

  EvalReport rep;
  rep.model = std::string(ModelKindName(model.kind));
  rep.seed = model.provenance.train.seed;
  rep.ranking = ranking == RankBy::kConfidence ? "confidence" : "loss";

  const auto labels = truth.row_labels();
  rep.k = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  const Vector& rank_scores = ranking == RankBy::kConfidence ? scored.row_scores : scored.row_losses;
  rep.p_at_k = rep.k == 0 ? kNaN
                          : PrecisionAtK(labels, std::span(rank_scores.data(), rank_scores.size()),
                                         rep.k);

  std::vector<double> ap_cat, ap_num, ev_cat, ev_num;
  const std::size_t n = corrupted.num_rows();
  for (std::size_t d = 0; d < schema.size(); ++d) {
    const auto& spec = schema.attribute(d);
    rep.attributes.push_back(spec.name);
    std::vector<bool> cell_labels(n);
    std::vector<double> conf(n);
    std::vector<std::size_t> flagged;
    for (std::size_t r = 0; r < n; ++r) {
      cell_labels[r] = truth.mask.at(r, d);
      conf[r] = scored.confidences(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d));
      if (cell_labels[r]) flagged.push_back(r);
    }
    if (flagged.empty()) {
      rep.ap.push_back(kNaN);
      rep.ev.push_back(kNaN);
      continue;
    }
    const double ap = AveragePrecision(conf, cell_labels);
    rep.ap.push_back(ap);
    (spec.is_categorical() ? ap_cat : ap_num).push_back(ap);

    const Span s = layout.spans[d];
    const auto col = static_cast<Eigen::Index>(s.start);
    auto original = [&](std::size_t r) -> const std::string& {
      const auto it = truth.originals.find({r, d});
      if (it == truth.originals.end()) {
        throw Error(ErrorCode::kPrecondition, "missing original for flagged cell (" +
                                                  std::to_string(r) + ", " + spec.name + ")");
      }
      return it->second;
    };
    double ev = 0.0;
    if (spec.is_numeric()) {
      // Normalize by the spread of the clean test column.
      std::vector<double> clean(n);
      for (std::size_t r = 0; r < n; ++r) {
        const std::string& v = cell_labels[r] ? original(r) : corrupted.cell(r, d);
        const auto x = ParseReal(v);
        if (!x) throw Error(ErrorCode::kParse, "non-numeric original for '" + spec.name + "'");
        clean[r] = *x;
      }
      const double mean = std::accumulate(clean.begin(), clean.end(), 0.0) / static_cast<double>(n);
      double ss = 0.0;
      for (double x : clean) ss += (x - mean) * (x - mean);
      double sigma = std::sqrt(ss / static_cast<double>(n));
      if (!(sigma > 0.0)) sigma = spec.std_dev;
      std::vector<double> xo, xhat;
      for (std::size_t r : flagged) {
        xo.push_back(clean[r]);
        xhat.push_back(scored.reconstruction(static_cast<Eigen::Index>(r), col) * spec.std_dev +
                       spec.mean);
      }
      ev = ExpectedValueErrorNumeric(xo, xhat, sigma);
      ev_num.push_back(ev);
    } else {
      const auto w = static_cast<Eigen::Index>(s.width);
      Matrix t = Matrix::Zero(static_cast<Eigen::Index>(flagged.size()), w);
      Matrix p(static_cast<Eigen::Index>(flagged.size()), w);
      for (std::size_t i = 0; i < flagged.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        if (const auto idx = spec.category_index(original(flagged[i]))) {
          t(row, static_cast<Eigen::Index>(*idx)) = 1.0;
        }
        p.row(row) = scored.probabilities.row(static_cast<Eigen::Index>(flagged[i])).segment(col, w);
      }
      ev = ExpectedValueErrorCategorical(t, p);
      ev_cat.push_back(ev);
    }
    rep.ev.push_back(ev);
  }
  rep.map_categorical = MeanOf(ap_cat);
  rep.map_numeric = MeanOf(ap_num);
  rep.mev_categorical = MeanOf(ev_cat);
  rep.mev_numeric_log = ev_num.empty() ? kNaN : std::log(MeanOf(ev_num));
  return rep;
}

namespace {

nlohmann::json Num(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

std::string Cell(double v) { return std::isnan(v) ? "NA" : FormatReal(v); }

}  // namespace

nlohmann::json ReportToJson(const EvalReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t d = 0; d < r.attributes.size(); ++d) {
    per.push_back({{"attribute", r.attributes[d]}, {"ap", Num(r.ap[d])}, {"ev", Num(r.ev[d])}});
  }
  return {{"model", r.model},
          {"seed", r.seed},
          {"ranking", r.ranking},
          {"k", r.k},
          {"p_at_k", Num(r.p_at_k)},
          {"map_categorical", Num(r.map_categorical)},
          {"map_numeric", Num(r.map_numeric)},
          {"mev_categorical", Num(r.mev_categorical)},
          {"mev_numeric_log", Num(r.mev_numeric_log)},
          {"per_attribute", std::move(per)}};
}

std::vector<std::string> ReportCsvHeader() {
  return {"model", "seed", "ranking", "k", "p_at_k", "map_categorical", "map_numeric",
          "mev_categorical", "mev_numeric_log"};
}

std::vector<std::string> ReportCsvRow(const EvalReport& r) {
  return {r.model, std::to_string(r.seed), r.ranking, std::to_string(r.k), Cell(r.p_at_k),
          Cell(r.map_categorical), Cell(r.map_numeric), Cell(r.mev_categorical),
          Cell(r.mev_numeric_log)};
}

namespace {

MetricSummary Summarize(const std::vector<double>& values) {
  std::vector<double> v;
  for (double x : values) {
    if (!std::isnan(x)) v.push_back(x);
  }
  if (v.empty()) return {kNaN, kNaN};
  const double mean = MeanOf(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

}  // namespace

std::vector<AggregateReport> Aggregate(const std::vector<EvalReport>& reports) {
  std::vector<std::string> order;
  for (const auto& r : reports) {
    if (std::find(order.begin(), order.end(), r.model) == order.end()) order.push_back(r.model);
  }
  std::vector<AggregateReport> out;
  for (const auto& name : order) {
    std::vector<double> p, mc, mn, ec, en;
    for (const auto& r : reports) {
      if (r.model != name) continue;
      p.push_back(r.p_at_k);
      mc.push_back(r.map_categorical);
      mn.push_back(r.map_numeric);
      ec.push_back(r.mev_categorical);
      en.push_back(r.mev_numeric_log);
    }
    out.push_back({name, p.size(), Summarize(p), Summarize(mc), Summarize(mn), Summarize(ec),
                   Summarize(en)});
  }
  return out;
}

nlohmann::json AggregateToJson(const AggregateReport& a) {
  auto m = [](const MetricSummary& s) {
    return nlohmann::json{{"mean", Num(s.mean)}, {"std", Num(s.std_dev)}};
  };
  return {{"model", a.model},
          {"runs", a.runs},
          {"p_at_k", m(a.p_at_k)},
          {"map_categorical", m(a.map_categorical)},
          {"map_numeric", m(a.map_numeric)},
          {"mev_categorical", m(a.mev_categorical)},
          {"mev_numeric_log", m(a.mev_numeric_log)}};
}

RawTable ReportsToTable(const std::vector<EvalReport>& reports) {
  RawTable t(ReportCsvHeader(), {});
  for (const auto& r : reports) t.append_row(ReportCsvRow(r));
  return t;
}

RawTable AggregatesToTable(const std::vector<AggregateReport>& aggregates) {
  RawTable t({"model", "runs", "p_at_k_mean", "p_at_k_std", "map_categorical_mean",
              "map_categorical_std", "map_numeric_mean", "map_numeric_std",
              "mev_categorical_mean", "mev_categorical_std", "mev_numeric_log_mean",
              "mev_numeric_log_std"},
             {});
  for (const auto& a : aggregates) {
    t.append_row(std::vector<std::string>{
        a.model, std::to_string(a.runs), Cell(a.p_at_k.mean), Cell(a.p_at_k.std_dev),
        Cell(a.map_categorical.mean), Cell(a.map_categorical.std_dev), Cell(a.map_numeric.mean),
        Cell(a.map_numeric.std_dev), Cell(a.mev_categorical.mean), Cell(a.mev_categorical.std_dev),
        Cell(a.mev_numeric_log.mean), Cell(a.mev_numeric_log.std_dev)});
  }
  return t;
}

}  // namespace celldx
