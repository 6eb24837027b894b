// SPDX-License-Identifier: Apache-2.0
//
// Small hand-made instances shared by the unit tests and the acceptance run.

#pragma once

#include "tulip/scvrp.hpp"

namespace fixtures {

/// Four cities around a depot, demands 2, 2, {1 or 7}, 2, capacity 10, two
/// equiprobable scenarios. Distances are a metric on the complete graph
/// under which the tour 0-3-2-1-4-0 (or its reverse) is optimal.
inline tulip::scvrp::Instance four_city_toy() {
  tulip::scvrp::Instance inst;
  inst.name = "four_city";
  inst.dist.resize(5, 5);
  inst.dist << 0, 1, 3, 2, 1,
               1, 0, 2, 2, 1,
               3, 2, 0, 1, 3,
               2, 2, 1, 0, 3,
               1, 1, 3, 3, 0;
  inst.capacity = 10.0;
  inst.scenarios.probabilities = {0.5, 0.5};
  inst.scenarios.payload = {{0, 2, 2, 1, 2}, {0, 2, 2, 7, 2}};
  return inst;
}

}  // namespace fixtures
