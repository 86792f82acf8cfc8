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

#include <cstdint>
#include <string>
#include <string_view>

namespace stochnet {

enum class UnitFamily { Sigmoid, Tanh, ReluSum, Delta };

/**
 * Distribution family of a unit together with its encoding of events.
 *
 * Discrete events are small integer codes:
 *   - Sigmoid: code 0 -> 0.0, code 1 -> 1.0
 *   - Tanh:    code 0 -> -1.0, code 1 -> +1.0
 *   - ReluSum(K): a K-bit mask, one bit per internal sigmoid; the encoded
 *     value is the number of set bits. Internal sigmoid i (1-based) sees the
 *     pre-activation a - i + 0.5.
 * Delta units are deterministic, value = pre-activation, and have no codes.
 */
class UnitKind {
 public:
  static constexpr int kMaxReluComponents = 30;

  static UnitKind sigmoid() { return UnitKind(UnitFamily::Sigmoid, 1); }
  static UnitKind tanh() { return UnitKind(UnitFamily::Tanh, 1); }
  static UnitKind relu_sum(int components = 8) {
    return UnitKind(UnitFamily::ReluSum, components);
  }
  static UnitKind delta() { return UnitKind(UnitFamily::Delta, 1); }

  /// Parses "sigmoid", "tanh", "delta", "relusum" or "relusum:K".
  static UnitKind parse(std::string_view text);

  UnitFamily family() const { return family_; }
  /// K for ReluSum, 1 otherwise.
  int components() const { return components_; }
  bool is_discrete() const { return family_ != UnitFamily::Delta; }
  /// Number of discrete bits the unit contributes to a joint state.
  int bits() const { return is_discrete() ? components_ : 0; }
  std::uint32_t event_count() const {
    return is_discrete() ? (std::uint32_t{1} << components_) : 0;
  }

  /// The encoding function: event code -> real value.
  double encode(std::uint32_t code) const;
  /// Inverse of encode() for discrete kinds; throws on illegal values.
  std::uint32_t code_of(double encoded) const;
  /// Convex hull of the encoded values.
  double low() const;
  double high() const;

  std::string name() const;

  friend bool operator==(const UnitKind&, const UnitKind&) = default;

 private:
  UnitKind(UnitFamily family, int components)
      : family_(family), components_(components) {}

  UnitFamily family_;
  int components_;
};

// Numerically stable scalar helpers shared by the model and its samplers.
double logistic(double a);
/// ln(1 + e^a)
double softplus(double a);
/// ln(e^a + e^-a)
double log_two_cosh(double a);

}  // namespace stochnet
