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

#include "celldx/service.h"

#include <charconv>
#include <numeric>

#include "httplib.h"

#include "celldx/checkpoint.h"
#include "celldx/error.h"

namespace celldx {

using nlohmann::json;

std::shared_ptr<const SessionState> BuildSession(TrainedModel model, RawTable data) {
  if (!model.is_network()) {
    throw Error(ErrorCode::kUnsupportedModelKind,
                "serving needs a network checkpoint, got " + std::string(ModelKindName(model.kind)));
  }
  CheckTableMatchesSchema(data, model.schema);
  auto s = std::make_shared<SessionState>();
  s->encoded = Encode(data, model.schema);
  s->scores = ScoreBatch(model, s->encoded.values);
  s->index = LatentIndex(model, s->encoded.values);
  s->map = BuildLatentMap(s->index.latents());
  const Vector& rs = s->scores.row_scores;
  s->ranking = TopK(std::span(rs.data(), static_cast<std::size_t>(rs.size())),
                    static_cast<std::size_t>(rs.size()));
  s->model = std::move(model);
  s->data = std::move(data);
  return s;
}

Service::~Service() {
  if (builder_.joinable()) builder_.join();
}

void Service::SetSession(std::shared_ptr<const SessionState> session) {
  std::lock_guard lock(mu_);
  session_ = std::move(session);
  build_error_status_ = 0;
  build_error_.clear();
}

void Service::BuildAsync(std::function<std::shared_ptr<const SessionState>()> build) {
  if (builder_.joinable()) builder_.join();
  builder_ = std::thread([this, build = std::move(build)] {
    try {
      SetSession(build());
    } catch (const Error& e) {
      std::lock_guard lock(mu_);
      build_error_status_ = e.code() == ErrorCode::kSchemaMismatch ? 409 : 500;
      build_error_ = e.what();
    } catch (const std::exception& e) {
      std::lock_guard lock(mu_);
      build_error_status_ = 500;
      build_error_ = e.what();
    }
  });
}

void Service::WaitUntilBuilt() {
  if (builder_.joinable()) builder_.join();
}

bool Service::ready() const { return session() != nullptr; }

std::shared_ptr<const SessionState> Service::session() const {
  std::lock_guard lock(mu_);
  return session_;
}

namespace {

HttpResponse Fail(int status, std::string message) {
  return {status, json{{"error", std::move(message)}}};
}

std::optional<std::size_t> ParseIndex(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

json Meta(const SessionState& s) {
  const auto& p = s.model.provenance;
  return {{"schema", SchemaToJson(s.model.schema)},
          {"model",
           {{"kind", ModelKindName(s.model.kind)},
            {"widths", s.model.network().widths()},
            {"train_config", TrainConfigToJson(p.train)},
            {"epochs_run", p.epochs_run},
            {"loss", p.loss == LossMode::kEnhanced ? "enhanced" : "plain"},
            {"regime", p.regime}}},
          {"rows", s.data.num_rows()},
          {"ranking", "confidence"}};
}

}  // namespace

HttpResponse Service::Handle(std::string_view method, std::string_view path,
                             const std::multimap<std::string, std::string>& query) const {
  if (method != "GET") return Fail(405, "read-only service");
  const auto s = session();
  if (!s) {
    std::lock_guard lock(mu_);
    if (build_error_status_ != 0) return Fail(build_error_status_, build_error_);
    return Fail(503, "index build in progress");
  }
  const std::size_t n = s->data.num_rows();
  auto row_arg = [&](std::string_view prefix) -> std::optional<std::size_t> {
    return ParseIndex(path.substr(prefix.size()));
  };

  if (path == "/meta") return {200, Meta(*s)};

  if (path == "/anomalies") {
    std::size_t k = std::min<std::size_t>(10, n);
    if (const auto it = query.find("k"); it != query.end()) {
      const auto parsed = ParseIndex(it->second);
      if (!parsed) return Fail(400, "k must be a non-negative integer");
      k = std::min(*parsed, n);
    }
    json rows = json::array();
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t r = s->ranking[i];
      rows.push_back({{"row", r}, {"row_score", s->scores.row_scores[static_cast<Eigen::Index>(r)]}});
    }
    return {200, json{{"k", k}, {"ranking", "confidence"}, {"rows", std::move(rows)}}};
  }

  if (path.starts_with("/explain/")) {
    const auto r = row_arg("/explain/");
    if (!r || *r >= n) return Fail(404, "unknown row");
    const Explanation e = Explain(s->model, s->data.row(*r), s->index, *r, *r, &s->map);
    return {200, ExplanationToJson(e)};
  }

  if (path == "/latent") {
    json points = json::array();
    for (std::size_t r = 0; r < n; ++r) {
      const auto i = static_cast<Eigen::Index>(r);
      points.push_back({{"row", r},
                        {"x", s->map.coordinates(i, 0)},
                        {"y", s->map.coordinates(i, 1)},
                        {"row_score", s->scores.row_scores[i]}});
    }
    return {200, json{{"points", std::move(points)}}};
  }

  if (path.starts_with("/rows/")) {
    const auto r = row_arg("/rows/");
    if (!r || *r >= n) return Fail(404, "unknown row");
    json values = json::array();
    for (std::size_t d = 0; d < s->data.num_columns(); ++d) {
      values.push_back({{"attribute", s->data.header()[d]}, {"value", s->data.cell(*r, d)}});
    }
    return {200, json{{"row", *r}, {"values", std::move(values)}}};
  }

  return Fail(404, "no such endpoint");
}

void Service::Mount(httplib::Server& server) const {
  server.Get(".*", [this](const httplib::Request& req, httplib::Response& res) {
    std::multimap<std::string, std::string> query(req.params.begin(), req.params.end());
    const HttpResponse out = Handle("GET", req.path, query);
    res.status = out.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(out.body.dump(), "application/json");
  });
}

}  // namespace celldx
