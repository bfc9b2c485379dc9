#pragma once

#include <string_view>

namespace flowsteer {

enum class ScheduleKind { optimal_transport };

/// alpha_t, beta_t of the interpolation x_t = alpha_t x1 + beta_t x0 and their
/// time derivatives.
struct ScheduleValues {
  double alpha;
  double beta;
  double alpha_dot;
  double beta_dot;
};

/// (t, 1 - t, 1, -1); rejects t outside [0, 1].
ScheduleValues ot_schedule(double t);

struct ScheduleParams {
  ScheduleKind kind = ScheduleKind::optimal_transport;

  ScheduleValues at(double t) const;
};

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

}  // namespace flowsteer
