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

#include <filesystem>
#include <iosfwd>
#include <string>

#include "stochnet/network.hpp"

namespace stochnet {

/**
 * Text checkpoint, version 1:
 *
 *   STOCHNET v1
 *   input <count | RxCxK>
 *   layers <N>
 *   layer <layer grammar, see format_layer()>     (N lines)
 *   params
 *   <fan_in + 1 decimal floats per unit>          (units in layer order)
 *   end
 *
 * Floats are written in shortest round-trip form, so saving the same network
 * twice gives byte-identical files and loading restores theta exactly.
 */
void save_checkpoint(const Network& net, std::ostream& out);
void save_checkpoint(const Network& net, const std::filesystem::path& path);

/// Throws DataError on a bad header, malformed spec or parameter rows.
Network load_checkpoint(std::istream& in);
Network load_checkpoint(const std::filesystem::path& path);

/// Shortest representation that round-trips through from_chars.
std::string format_double(double value);

}  // namespace stochnet
