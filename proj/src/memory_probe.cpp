#include "slam3d/memory_probe.hpp"

#include <algorithm>

namespace slam3d {

AllocationCounters& thread_allocation_counters() noexcept {
  thread_local AllocationCounters counters;
  return counters;
}

namespace detail {

void note_allocation(std::size_t bytes) noexcept {
  auto& c = thread_allocation_counters();
  c.current += static_cast<std::int64_t>(bytes);
  c.peak = std::max(c.peak, c.current);
}

void note_deallocation(std::size_t bytes) noexcept {
  thread_allocation_counters().current -= static_cast<std::int64_t>(bytes);
}

}  // namespace detail

MemoryScope::MemoryScope() noexcept {
  auto& c = thread_allocation_counters();
  outer_peak_ = c.peak;
  c.peak = c.current;
}

MemoryScope::~MemoryScope() {
  auto& c = thread_allocation_counters();
  c.peak = std::max(c.peak, outer_peak_);
}

std::int64_t MemoryScope::peak_bytes() const noexcept { return thread_allocation_counters().peak; }

std::int64_t MemoryScope::live_bytes() const noexcept { return thread_allocation_counters().current; }

}  // namespace slam3d
