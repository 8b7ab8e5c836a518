// Copyright 2026 The gmedian Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gmedian/rng.hpp"

#include <array>
#include <cmath>

namespace gmedian {
namespace {

constexpr int kLayers = 128;
constexpr double kTailStart = 3.442619855899;
constexpr double kLayerArea = 9.91256303526217e-3;

struct ZigguratTables {
  std::array<double, kLayers> edge{};   // right edge of each layer
  std::array<double, kLayers> ratio{};  // fraction of a layer inside the next one
  std::array<double, kLayers> density{};

  ZigguratTables() {
    double dn = kTailStart;
    double tn = dn;
    const double q = kLayerArea / std::exp(-0.5 * dn * dn);
    ratio[0] = dn / q;
    ratio[1] = 0.0;
    edge[0] = q;
    edge[kLayers - 1] = dn;
    density[0] = 1.0;
    density[kLayers - 1] = std::exp(-0.5 * dn * dn);
    for (int i = kLayers - 2; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(kLayerArea / dn + std::exp(-0.5 * dn * dn)));
      ratio[i + 1] = dn / tn;
      tn = dn;
      density[i] = std::exp(-0.5 * dn * dn);
      edge[i] = dn;
    }
  }
};

const ZigguratTables& tables() {
  static const ZigguratTables t;
  return t;
}

}  // namespace

double RngStream::normal() noexcept {
  const ZigguratTables& t = tables();
  for (;;) {
    const std::uint64_t w = next_u64();
    const auto layer = static_cast<std::size_t>(w & (kLayers - 1));
    // Signed 53-bit value in [-1, 1).
    const double u = static_cast<double>(static_cast<std::int64_t>(w) >> 11) * 0x1.0p-52;
    const double x = u * t.edge[layer];
    if (std::abs(u) < t.ratio[layer]) return x;
    if (layer == 0) {
      double tail;
      double y;
      do {
        tail = -std::log(uniform()) / kTailStart;
        y = -std::log(uniform());
      } while (y + y < tail * tail);
      return u > 0.0 ? kTailStart + tail : -kTailStart - tail;
    }
    if (t.density[layer] + uniform() * (t.density[layer - 1] - t.density[layer]) <
        std::exp(-0.5 * x * x)) {
      return x;
    }
  }
}

}  // namespace gmedian
