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

#include "stochnet/unit_kind.hpp"

#include <bit>
#include <charconv>
#include <cmath>

#include "stochnet/error.hpp"

namespace stochnet {

UnitKind UnitKind::parse(std::string_view text) {
  if (text == "sigmoid") return sigmoid();
  if (text == "tanh") return tanh();
  if (text == "delta") return delta();
  if (text == "relusum") return relu_sum();
  constexpr std::string_view prefix = "relusum:";
  if (text.starts_with(prefix)) {
    const auto digits = text.substr(prefix.size());
    int k = 0;
    const auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc{} && ptr == digits.data() + digits.size() && k >= 1 &&
        k <= kMaxReluComponents) {
      return relu_sum(k);
    }
  }
  throw Error("unknown unit kind '" + std::string(text) + "'");
}

double UnitKind::encode(std::uint32_t code) const {
  switch (family_) {
    case UnitFamily::Sigmoid:
      return code ? 1.0 : 0.0;
    case UnitFamily::Tanh:
      return code ? 1.0 : -1.0;
    case UnitFamily::ReluSum:
      return static_cast<double>(std::popcount(code));
    case UnitFamily::Delta:
      break;
  }
  throw Error("delta units have no discrete encoding");
}

std::uint32_t UnitKind::code_of(double encoded) const {
  switch (family_) {
    case UnitFamily::Sigmoid:
      if (encoded == 0.0) return 0;
      if (encoded == 1.0) return 1;
      break;
    case UnitFamily::Tanh:
      if (encoded == -1.0) return 0;
      if (encoded == 1.0) return 1;
      break;
    case UnitFamily::ReluSum:
      // A count maps to its canonical (lowest-bits-set) event.
      if (encoded >= 0.0 && encoded <= components_ &&
          encoded == std::floor(encoded)) {
        const int count = static_cast<int>(encoded);
        return count == 32 ? ~std::uint32_t{0}
                           : (std::uint32_t{1} << count) - 1u;
      }
      break;
    case UnitFamily::Delta:
      throw Error("delta units have no discrete encoding");
  }
  throw Error("value " + std::to_string(encoded) + " is not a legal " +
              name() + " event");
}

double UnitKind::low() const {
  switch (family_) {
    case UnitFamily::Sigmoid:
    case UnitFamily::ReluSum:
      return 0.0;
    case UnitFamily::Tanh:
      return -1.0;
    case UnitFamily::Delta:
      break;
  }
  return -HUGE_VAL;
}

double UnitKind::high() const {
  switch (family_) {
    case UnitFamily::Sigmoid:
    case UnitFamily::Tanh:
      return 1.0;
    case UnitFamily::ReluSum:
      return components_;
    case UnitFamily::Delta:
      break;
  }
  return HUGE_VAL;
}

std::string UnitKind::name() const {
  switch (family_) {
    case UnitFamily::Sigmoid:
      return "sigmoid";
    case UnitFamily::Tanh:
      return "tanh";
    case UnitFamily::ReluSum:
      return "relusum:" + std::to_string(components_);
    case UnitFamily::Delta:
      return "delta";
  }
  return "?";
}

double logistic(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

double softplus(double a) {
  return a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
}

double log_two_cosh(double a) {
  const double m = std::fabs(a);
  return m + std::log1p(std::exp(-2.0 * m));
}

}  // namespace stochnet
