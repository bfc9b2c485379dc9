#pragma once

#include <functional>
#include <span>

#include "flowsteer/rng.hpp"

namespace flowsteer {

/// Draws one point into the span.
using PointSampler = std::function<void(Rng&, std::span<double>)>;

}  // namespace flowsteer
