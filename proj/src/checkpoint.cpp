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

#include "stochnet/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "stochnet/error.hpp"

namespace stochnet {

namespace {

constexpr std::string_view kHeader = "STOCHNET v1";

bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

std::string expect_keyword(std::istream& in, std::string_view keyword) {
  std::string line;
  if (!next_line(in, line) || !line.starts_with(keyword) ||
      (line.size() > keyword.size() && line[keyword.size()] != ' ')) {
    throw DataError("checkpoint: expected '" + std::string(keyword) + "'");
  }
  const auto pos = line.find_first_not_of(' ', keyword.size());
  return pos == std::string::npos ? std::string() : line.substr(pos);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void save_checkpoint(const Network& net, std::ostream& out) {
  const NetworkSpec& spec = net.spec();
  out << kHeader << '\n';
  out << "input " << format_input(spec) << '\n';
  out << "layers " << spec.layers.size() << '\n';
  for (const auto& layer : spec.layers) {
    out << "layer " << format_layer(layer) << '\n';
  }
  out << "params\n";
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    for (std::size_t u = 0; u < net.layer_size(l); ++u) {
      const auto w = net.weights(l, u);
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (k) out << ' ';
        out << format_double(w[k]);
      }
      out << '\n';
    }
  }
  out << "end\n";
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  save_checkpoint(net, out);
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Network load_checkpoint(std::istream& in) {
  std::string line;
  if (!next_line(in, line) || line != kHeader) {
    throw DataError("checkpoint: bad header, expected '" +
                    std::string(kHeader) + "'");
  }
  NetworkSpec spec;
  try {
    parse_input(expect_keyword(in, "input"), spec);
    const std::string count_text = expect_keyword(in, "layers");
    std::size_t count = 0;
    const auto [ptr, ec] = std::from_chars(
        count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc{} || ptr != count_text.data() + count_text.size()) {
      throw DataError("checkpoint: bad layer count '" + count_text + "'");
    }
    for (std::size_t i = 0; i < count; ++i) {
      spec.layers.push_back(parse_layer(expect_keyword(in, "layer")));
    }
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }

  Network net = [&] {
    try {
      return Network(std::move(spec));
    } catch (const SpecError& e) {
      throw DataError(std::string("checkpoint: ") + e.what());
    }
  }();

  expect_keyword(in, "params");
  for (std::size_t l = 1; l <= net.layer_count(); ++l) {
    for (std::size_t u = 0; u < net.layer_size(l); ++u) {
      if (!next_line(in, line)) {
        throw DataError("checkpoint: missing parameter row for unit (" +
                        std::to_string(l) + ", " + std::to_string(u) + ")");
      }
      auto w = net.weights(l, u);
      const char* p = line.data();
      const char* end = line.data() + line.size();
      for (std::size_t k = 0; k < w.size(); ++k) {
        while (p < end && *p == ' ') ++p;
        const auto [next, ec] = std::from_chars(p, end, w[k]);
        if (ec != std::errc{}) {
          throw DataError("checkpoint: bad parameter row for unit (" +
                          std::to_string(l) + ", " + std::to_string(u) + ")");
        }
        p = next;
      }
      while (p < end && *p == ' ') ++p;
      if (p != end) {
        throw DataError("checkpoint: too many parameters for unit (" +
                        std::to_string(l) + ", " + std::to_string(u) + ")");
      }
    }
  }
  if (!next_line(in, line) || line != "end") {
    throw DataError("checkpoint: missing 'end' marker");
  }
  if (!net.parameters().all_finite()) {
    throw DataError("checkpoint: non-finite parameter");
  }
  return net;
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace stochnet
