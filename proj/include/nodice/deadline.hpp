#pragma once

#include "nodice/error.hpp"

#include <chrono>
#include <optional>

namespace nodice {

using Deadline = std::optional<std::chrono::steady_clock::time_point>;

inline Deadline deadline_after(double seconds) {
  return std::chrono::steady_clock::now() +
         std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(seconds));
}

/// Throws TimeoutError once the deadline has passed.
inline void check_deadline(const Deadline& d) {
  if (d && std::chrono::steady_clock::now() > *d) throw TimeoutError();
}

}  // namespace nodice
