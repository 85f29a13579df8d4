#pragma once

#include <cstddef>
#include <cstdint>
#include <new>

namespace slam3d {

/// Live/peak byte counters for tensor storage on the calling thread.
struct AllocationCounters {
  std::int64_t current = 0;
  std::int64_t peak = 0;
};

AllocationCounters& thread_allocation_counters() noexcept;

namespace detail {
void note_allocation(std::size_t bytes) noexcept;
void note_deallocation(std::size_t bytes) noexcept;
}  // namespace detail

/// std::allocator drop-in that feeds the per-thread counters. Tensor storage
/// uses it so a pipeline run can report its high-water mark.
template <typename T>
struct TrackingAllocator {
  using value_type = T;

  TrackingAllocator() noexcept = default;
  template <typename U>
  TrackingAllocator(const TrackingAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    auto* p = static_cast<T*>(::operator new(n * sizeof(T)));
    detail::note_allocation(n * sizeof(T));
    return p;
  }
  void deallocate(T* p, std::size_t n) noexcept {
    detail::note_deallocation(n * sizeof(T));
    ::operator delete(p);
  }

  template <typename U>
  bool operator==(const TrackingAllocator<U>&) const noexcept { return true; }
};

/// Scoped high-water mark. On entry the thread's peak is reset to the live
/// byte count; on exit the outer peak is restored (max of both).
class MemoryScope {
 public:
  MemoryScope() noexcept;
  ~MemoryScope();
  MemoryScope(const MemoryScope&) = delete;
  MemoryScope& operator=(const MemoryScope&) = delete;

  std::int64_t peak_bytes() const noexcept;
  std::int64_t live_bytes() const noexcept;

 private:
  std::int64_t outer_peak_;
};

}  // namespace slam3d
