#pragma once

#include <cstddef>
#include <functional>

namespace fsml {

/// Worker count used by parallel_for. 0 selects the hardware concurrency.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

/// Runs body(i) for i in [0, count). Each index is processed exactly once and
/// callers write to disjoint slots, so results do not depend on the schedule.
/// Calls nested inside a running parallel_for execute serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace fsml
