// Copyright 2026 The SciSumm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <memory>
#include <new>
#include <vector>

namespace scisumm {

// Counts live bytes held by tensor buffers so benchmarks can report peak
// allocation. Only memory routed through TrackedAllocator is counted.
class AllocationTracker {
 public:
  static void add(std::size_t bytes) {
    std::size_t now = current().fetch_add(bytes) + bytes;
    std::size_t prev = peak().load();
    while (now > prev && !peak().compare_exchange_weak(prev, now)) {
    }
  }
  static void remove(std::size_t bytes) { current().fetch_sub(bytes); }

  static std::size_t current_bytes() { return current().load(); }
  static std::size_t peak_bytes() { return peak().load(); }
  // Peak restarts from whatever is live right now.
  static void reset_peak() { peak().store(current().load()); }

 private:
  static std::atomic<std::size_t>& current() {
    static std::atomic<std::size_t> v{0};
    return v;
  }
  static std::atomic<std::size_t>& peak() {
    static std::atomic<std::size_t> v{0};
    return v;
  }
};

template <typename T>
struct TrackedAllocator {
  using value_type = T;

  TrackedAllocator() noexcept = default;
  template <typename U>
  TrackedAllocator(const TrackedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    T* p = std::allocator<T>{}.allocate(n);
    AllocationTracker::add(n * sizeof(T));
    return p;
  }
  void deallocate(T* p, std::size_t n) noexcept {
    AllocationTracker::remove(n * sizeof(T));
    std::allocator<T>{}.deallocate(p, n);
  }

  template <typename U>
  bool operator==(const TrackedAllocator<U>&) const noexcept { return true; }
};

using Buffer = std::vector<double, TrackedAllocator<double>>;

}  // namespace scisumm
