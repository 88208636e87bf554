#pragma once

#include <array>
#include <cmath>

#include "tlc/config.hpp"

namespace tlc {

using LightState = std::array<bool, kRoads>;

// Fixed-cycle lights with no lost time: intersection 1 gives theta_1 to road 1
// then theta_3 to road 3; intersection 2 gives theta_2 to road 2 then theta_4
// to road 4. Both start on their first road at t = 0.
inline LightState light_phase(double t, const ThetaVector& theta) {
  LightState g{};
  for (int first : {0, 1}) {
    const int second = perpendicular(first);
    const double period = theta[first] + theta[second];
    const double phase = std::fmod(t, period);
    const bool first_green = phase < theta[first];
    g[first] = first_green;
    g[second] = !first_green;
  }
  return g;
}

}  // namespace tlc
