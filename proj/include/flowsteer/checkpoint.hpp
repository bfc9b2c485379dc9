#pragma once

#include <iosfwd>
#include <string>

#include "flowsteer/velocity_model.hpp"

namespace flowsteer {

inline constexpr int kCheckpointVersion = 1;

/// Text checkpoint:
///
///   flowsteer-checkpoint <version>
///   schedule <kind>
///   dim <d>
///   hidden <w1> <w2> ...
///   activation <tanh|silu>
///   score_head <0|1>
///   layer <index> <in> <out>
///   weights <in*out values, row-major, y = x W + b>
///   bias <out values>
///   ...
///   end
///
/// Values are written with 17 significant digits, so a reload reproduces every
/// parameter, and therefore every model output, bit for bit.
void write_checkpoint(std::ostream& out, const VelocityModel& model);
void save_checkpoint(const std::string& path, const VelocityModel& model);

/// Throws ConfigError on a malformed or unreadable document.
VelocityModel read_checkpoint(std::istream& in);
VelocityModel load_checkpoint(const std::string& path);

}  // namespace flowsteer
