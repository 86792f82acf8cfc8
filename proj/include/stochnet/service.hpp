/*
 * Copyright 2026 The stochnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "stochnet/dataset.hpp"
#include "stochnet/error.hpp"
#include "stochnet/image.hpp"
#include "stochnet/inference.hpp"
#include "stochnet/network.hpp"
#include "stochnet/segmentation.hpp"

namespace httplib {
class Server;
}

namespace stochnet {

/// Failure with an HTTP status and a stable machine-readable code.
class ServiceError : public Error {
 public:
  ServiceError(int status, std::string code, const std::string& message)
      : Error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

std::string base64_encode(std::string_view bytes);
/// Throws ServiceError (400, "bad_base64") on malformed input.
std::string base64_decode(std::string_view text);

enum class ScribbleLabel { Foreground, Background, Erase };

struct Scribble {
  int x = 0;  // column
  int y = 0;  // row
  ScribbleLabel label = ScribbleLabel::Foreground;
};

/// Marginals of one session at one revision.
struct SessionMarginals {
  std::string session_id;
  std::uint64_t revision = 0;
  /// "forward" (creation preview), "mc" or "gibbs".
  std::string method;
  MarginalField field;
  int rows = 0;
  int cols = 0;
};

struct SessionInfo {
  std::string id;
  std::uint64_t revision = 0;
  std::size_t clamped = 0;
};

/**
 * Interactive segmentation sessions over one loaded model.
 *
 * Every mutation bumps the session's revision. recompute() caches its result
 * per revision, and calls on one session are serialised while distinct
 * sessions run concurrently.
 */
class Service {
 public:
  Service(Network model, SegmentBudget budget,
          std::optional<ImageDataset> dataset = std::nullopt);

  /// Throws ServiceError 422 "bad_image" when the image does not fit the
  /// model input.
  SessionMarginals create_session(const RgbImage& image);
  /// Image `index` of the loaded dataset.
  SessionMarginals create_session(std::size_t dataset_index);

  /// Validates every scribble first; on an out-of-range coordinate nothing
  /// changes and ServiceError 400 "out_of_bounds" is thrown.
  SessionInfo apply_scribbles(const std::string& id,
                              const std::vector<Scribble>& scribbles);

  SessionMarginals recompute(const std::string& id);
  /// Most recent marginals, which may be older than the current revision.
  SessionMarginals latest(const std::string& id) const;
  SessionInfo info(const std::string& id) const;
  RgbImage image(const std::string& id) const;

  std::size_t session_count() const;
  const Network& model() const { return model_; }
  int rows() const { return grid_.rows; }
  int cols() const { return grid_.cols; }

 private:
  struct Session {
    mutable std::mutex mutex;
    std::string id;
    RgbImage image;
    std::vector<double> input;
    ClampSet clamp;
    std::uint64_t revision = 0;
    SessionMarginals marginals;
  };

  std::shared_ptr<Session> find(const std::string& id) const;

  Network model_;
  GridShape grid_;
  SegmentBudget budget_;
  std::optional<ImageDataset> dataset_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::atomic<std::uint64_t> next_id_{1};
};

/// Registers the JSON routes of `service` on `server`:
///   POST /sessions, POST /sessions/{id}/scribbles,
///   POST /sessions/{id}/recompute, GET /sessions/{id}/marginals,
///   GET /health
void register_routes(httplib::Server& server, Service& service);

}  // namespace stochnet
