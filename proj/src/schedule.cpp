#include "flowsteer/schedule.hpp"

#include <cmath>
#include <string>

#include "flowsteer/error.hpp"

namespace flowsteer {

ScheduleValues ot_schedule(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("schedule time outside [0, 1]: " + std::to_string(t));
  return {t, 1.0 - t, 1.0, -1.0};
}

ScheduleValues ScheduleParams::at(double t) const {
  switch (kind) {
    case ScheduleKind::optimal_transport:
      return ot_schedule(t);
  }
  throw DomainError("unknown schedule kind");
}

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::optimal_transport:
      return "optimal_transport";
  }
  return "unknown";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "optimal_transport") return ScheduleKind::optimal_transport;
  throw ConfigError("unknown schedule kind '" + std::string(name) + "'");
}

}  // namespace flowsteer
