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

#ifndef CELLDX_SERVICE_H_
#define CELLDX_SERVICE_H_

#include <atomic>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

#include "celldx/explainer.h"
#include "celldx/models.h"
#include "celldx/table.h"

namespace httplib {
class Server;
}

namespace celldx {

// Everything the HTTP endpoints read. Built once, never mutated afterwards.
struct SessionState {
  TrainedModel model;
  RawTable data;
  EncodedMatrix encoded;
  ScoredBatch scores;
  LatentIndex index;
  LatentMap map;
  std::vector<std::size_t> ranking;  // all rows by descending row score
};

// Throws kSchemaMismatch if `data` does not fit the checkpoint schema and
// kUnsupportedModelKind for models without a latent space.
std::shared_ptr<const SessionState> BuildSession(TrainedModel model, RawTable data);

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

// Read-only JSON API over a session:
//   GET /meta, /anomalies?k=, /explain/{row}, /latent, /rows/{row}
// Requests answer 503 until a session is installed and 409 when the session
// could not be built because data and checkpoint disagree.
class Service {
 public:
  Service() = default;
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void SetSession(std::shared_ptr<const SessionState> session);
  // Builds the session on a background thread; failures are reported by
  // every later request.
  void BuildAsync(std::function<std::shared_ptr<const SessionState>()> build);
  void WaitUntilBuilt();
  bool ready() const;

  HttpResponse Handle(std::string_view method, std::string_view path,
                      const std::multimap<std::string, std::string>& query) const;

  // Registers the catch-all route on an httplib server.
  void Mount(httplib::Server& server) const;

 private:
  std::shared_ptr<const SessionState> session() const;

  mutable std::mutex mu_;
  std::shared_ptr<const SessionState> session_;
  int build_error_status_ = 0;
  std::string build_error_;
  std::thread builder_;
};

}  // namespace celldx

#endif  // CELLDX_SERVICE_H_
