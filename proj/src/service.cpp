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


#include "stochnet/service.hpp"

#include <array>

#include "httplib.h"
#include "json.hpp"
#include "stochnet/error.hpp"

namespace stochnet {

using json = nlohmann::json;

namespace {

constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int base64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint8_t(bytes[i]) << 16) |
                            (std::uint8_t(bytes[i + 1]) << 8) |
                            std::uint8_t(bytes[i + 2]);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t v = std::uint8_t(bytes[i]) << 16;
    if (rest == 2) v |= std::uint8_t(bytes[i + 1]) << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) {
    throw ServiceError(400, "bad_base64", "base64 length is not a multiple of 4");
  }
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::array<int, 4> v{};
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        ++pad;
        v[k] = 0;
        continue;
      }
      if (pad > 0 || (v[k] = base64_value(c)) < 0) {
        throw ServiceError(400, "bad_base64", "invalid base64 character");
      }
    }
    const std::uint32_t bits = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out += static_cast<char>((bits >> 16) & 0xff);
    if (pad < 2) out += static_cast<char>((bits >> 8) & 0xff);
    if (pad < 1) out += static_cast<char>(bits & 0xff);
  }
  return out;
}

Service::Service(Network model, SegmentBudget budget,
                 std::optional<ImageDataset> dataset)
    : model_(std::move(model)), budget_(budget), dataset_(std::move(dataset)) {
  const NetworkSpec& spec = model_.spec();
  const auto& out_grid = spec.layers.back().grid;
  if (!spec.input_grid || spec.input_channels != 3 || !out_grid ||
      !(*out_grid == *spec.input_grid)) {
    throw ConfigError(
        "model cannot segment images: it needs an RxCx3 input and an RxC "
        "output grid");
  }
  if (!model_.kind(model_.output_layer()).is_discrete() ||
      model_.kind(model_.output_layer()).event_count() != 2) {
    throw ConfigError("model cannot segment images: outputs must be binary");
  }
  grid_ = *out_grid;
  if (dataset_ && dataset_->size() > 0 &&
      (dataset_->rows != grid_.rows || dataset_->cols != grid_.cols)) {
    throw ConfigError("dataset images do not match the model grid");
  }
}

SessionMarginals Service::create_session(const RgbImage& image) {
  if (image.rows != grid_.rows || image.cols != grid_.cols) {
    throw ServiceError(422, "bad_image",
                       "image is " + std::to_string(image.rows) + "x" +
                           std::to_string(image.cols) + ", model expects " +
                           std::to_string(grid_.rows) + "x" +
                           std::to_string(grid_.cols));
  }
  auto session = std::make_shared<Session>();
  session->id = "s" + std::to_string(next_id_.fetch_add(1));
  session->image = image;
  session->input = image_to_input(image);
  session->clamp = ClampSet(model_.output_count());
  session->marginals = {session->id, 0, "forward",
                        decision_marginals(model_, session->input,
                                           DecisionRule::deterministic(), 0),
                        grid_.rows, grid_.cols};
  {
    std::unique_lock lock(sessions_mutex_);
    sessions_[session->id] = session;
  }
  return session->marginals;
}

SessionMarginals Service::create_session(std::size_t dataset_index) {
  if (!dataset_) throw ServiceError(400, "no_dataset", "no dataset is loaded");
  if (dataset_index >= dataset_->size()) {
    throw ServiceError(400, "out_of_bounds",
                       "dataset index " + std::to_string(dataset_index) +
                           " out of range for " +
                           std::to_string(dataset_->size()) + " images");
  }
  return create_session(dataset_->examples[dataset_index].image);
}

std::shared_ptr<Service::Session> Service::find(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw ServiceError(404, "not_found", "no session '" + id + "'");
  }
  return it->second;
}

SessionInfo Service::apply_scribbles(const std::string& id,
                                     const std::vector<Scribble>& scribbles) {
  const auto session = find(id);
  std::lock_guard lock(session->mutex);
  for (const Scribble& s : scribbles) {
    if (s.x < 0 || s.y < 0 || s.x >= grid_.cols || s.y >= grid_.rows) {
      throw ServiceError(400, "out_of_bounds",
                         "scribble (" + std::to_string(s.x) + ", " +
                             std::to_string(s.y) + ") outside " +
                             std::to_string(grid_.cols) + "x" +
                             std::to_string(grid_.rows) + " image");
    }
  }
  for (const Scribble& s : scribbles) {
    const std::size_t v = std::size_t(s.y) * grid_.cols + s.x;
    switch (s.label) {
      case ScribbleLabel::Foreground:
        session->clamp.clamp(v, 1);
        break;
      case ScribbleLabel::Background:
        session->clamp.clamp(v, 0);
        break;
      case ScribbleLabel::Erase:
        session->clamp.release(v);
        break;
    }
  }
  ++session->revision;
  return {session->id, session->revision, session->clamp.size()};
}

SessionMarginals Service::recompute(const std::string& id) {
  const auto session = find(id);
  std::lock_guard lock(session->mutex);
  if (session->marginals.revision == session->revision &&
      session->marginals.method != "forward") {
    return session->marginals;
  }
  MarginalField field;
  try {
    field = segment_marginals(model_, session->input, session->clamp, budget_);
  } catch (const NonErgodicError& e) {
    throw ServiceError(422, "non_ergodic", e.what());
  }
  session->marginals = {session->id, session->revision,
                        session->clamp.empty() ? "mc" : "gibbs", std::move(field),
                        grid_.rows, grid_.cols};
  return session->marginals;
}

SessionMarginals Service::latest(const std::string& id) const {
  const auto session = find(id);
  std::lock_guard lock(session->mutex);
  return session->marginals;
}

SessionInfo Service::info(const std::string& id) const {
  const auto session = find(id);
  std::lock_guard lock(session->mutex);
  return {session->id, session->revision, session->clamp.size()};
}

RgbImage Service::image(const std::string& id) const {
  const auto session = find(id);
  std::lock_guard lock(session->mutex);
  return session->image;
}

std::size_t Service::session_count() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

// ---------------------------------------------------------------------------
// HTTP

namespace {

json marginals_json(const SessionMarginals& m) {
  return {{"session_id", m.session_id}, {"revision", m.revision},
          {"method", m.method},         {"rows", m.rows},
          {"cols", m.cols},             {"samples", m.field.samples},
          {"marginals", m.field.outputs}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  send_json(res, status, {{"code", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  try {
    return req.body.empty() ? json::object() : json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw ServiceError(400, "bad_json", std::string("malformed JSON: ") + e.what());
  }
}

template <class Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e.status(), e.code(), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "bad_request", e.what());
    } catch (const DataError& e) {
      send_error(res, 422, "bad_image", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

ScribbleLabel parse_label(const std::string& text) {
  if (text == "fg") return ScribbleLabel::Foreground;
  if (text == "bg") return ScribbleLabel::Background;
  if (text == "erase") return ScribbleLabel::Erase;
  throw ServiceError(400, "bad_request",
                     "scribble label must be fg, bg or erase, got '" + text + "'");
}

}  // namespace

void register_routes(httplib::Server& server, Service& service) {
  server.Get("/health", guarded([&service](const httplib::Request&,
                                           httplib::Response& res) {
               send_json(res, 200,
                         {{"status", "ok"},
                          {"sessions", service.session_count()},
                          {"rows", service.rows()},
                          {"cols", service.cols()}});
             }));

  server.Post("/sessions", guarded([&service](const httplib::Request& req,
                                              httplib::Response& res) {
                const json body = parse_body(req);
                SessionMarginals m;
                if (body.contains("image_ppm_base64")) {
                  const std::string bytes =
                      base64_decode(body.at("image_ppm_base64").get<std::string>());
                  m = service.create_session(decode_ppm(bytes, "upload"));
                } else if (body.contains("dataset_index")) {
                  m = service.create_session(body.at("dataset_index").get<std::size_t>());
                } else {
                  throw ServiceError(400, "bad_request",
                                     "expected image_ppm_base64 or dataset_index");
                }
                json out = marginals_json(m);
                out["image_ppm_base64"] =
                    base64_encode(encode_ppm(service.image(m.session_id)));
                send_json(res, 201, out);
              }));

  server.Post(R"(/sessions/([^/]+)/scribbles)",
              guarded([&service](const httplib::Request& req,
                                 httplib::Response& res) {
                const json body = parse_body(req);
                std::vector<Scribble> scribbles;
                for (const json& s : body.at("scribbles")) {
                  scribbles.push_back({s.at("x").get<int>(), s.at("y").get<int>(),
                                       parse_label(s.at("label").get<std::string>())});
                }
                const SessionInfo info =
                    service.apply_scribbles(req.matches[1], scribbles);
                send_json(res, 200,
                          {{"session_id", info.id},
                           {"revision", info.revision},
                           {"clamped", info.clamped}});
              }));

  server.Post(R"(/sessions/([^/]+)/recompute)",
              guarded([&service](const httplib::Request& req,
                                 httplib::Response& res) {
                send_json(res, 200, marginals_json(service.recompute(req.matches[1])));
              }));

  server.Get(R"(/sessions/([^/]+)/marginals)",
             guarded([&service](const httplib::Request& req,
                                httplib::Response& res) {
               const std::string id = req.matches[1];
               json out = marginals_json(service.latest(id));
               out["current_revision"] = service.info(id).revision;
               send_json(res, 200, out);
             }));
}

}  // namespace stochnet
