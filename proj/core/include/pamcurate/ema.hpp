#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "pamcurate/errors.hpp"

namespace pamcurate {

/// Teacher momentum schedule: linear ramp from tau0 to tau_end over
/// ramp_updates steps, then constant.
struct EmaConfig {
  double tau0 = 0.999;
  double tau_end = 0.9999;
  std::uint64_t ramp_updates = 20;

  void validate() const;
};

double tau_at(std::uint64_t step, const EmaConfig& config = {});

/// teacher = tau * teacher + (1 - tau) * student, elementwise.
template <typename T>
void ema_update(std::span<T> teacher, std::span<const T> student, double tau) {
  if (teacher.size() != student.size()) {
    throw ValidationError("ema_update: teacher has " + std::to_string(teacher.size()) +
                          " weights, student has " + std::to_string(student.size()));
  }
  const T keep = static_cast<T>(tau);
  const T take = static_cast<T>(1.0 - tau);
  for (std::size_t i = 0; i < teacher.size(); ++i) {
    teacher[i] = keep * teacher[i] + take * student[i];
  }
}

}  // namespace pamcurate
