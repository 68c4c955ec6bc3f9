/*
 * Copyright 2026 The mcf Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MCF_PARALLEL_HPP
#define MCF_PARALLEL_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <mutex>
#include <span>
#include <vector>

#include "mcf/dataset.hpp"

namespace mcf {

/// One mutex per shared parameter slot (item ids, taxonomy nodes, and any
/// extra slots a trainer appends, e.g. time bins).
///
/// Lock sets are acquired in ascending slot order and a thread may hold only
/// one set at a time; together these rule out deadlock.
class LockTable {
 public:
  explicit LockTable(std::size_t slots) : mutexes_(slots) {}
  LockTable(const LockTable&) = delete;
  LockTable& operator=(const LockTable&) = delete;

  std::size_t size() const noexcept { return mutexes_.size(); }

  class Guard {
   public:
    Guard() = default;
    Guard(Guard&& other) noexcept;
    Guard& operator=(Guard&& other) noexcept;
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;
    ~Guard() { release(); }

    void release() noexcept;
    std::span<const std::size_t> slots() const noexcept;

   private:
    friend class LockTable;
    LockTable* table_ = nullptr;
    std::array<std::size_t, 4> small_{};
    std::vector<std::size_t> large_;
    std::size_t count_ = 0;
  };

  /// Locks the (deduplicated) slots in ascending order. Throws
  /// std::logic_error if the calling thread already holds a set.
  Guard acquire(std::initializer_list<std::size_t> slots);
  Guard acquire(std::span<const std::size_t> slots);

 private:
  Guard lock_sorted(Guard g);
  std::vector<std::mutex> mutexes_;
};

/// Runs `task(user)` once per entry of `order` on `threads` workers. With one
/// thread the tasks run on the caller in `order`. The first exception thrown
/// by any task stops the remaining work and is rethrown.
void parallel_for_users(std::span<const UserId> order, unsigned threads, LockTable& locks,
                        const std::function<void(UserId, LockTable&)>& task);

/// Runs `task(row)` for every row in [0, rows). Tasks must write disjoint
/// outputs and only read frozen inputs; results then do not depend on
/// `threads`.
void parallel_map_rows(std::size_t rows, unsigned threads,
                       const std::function<void(std::size_t)>& task);

/// Workers to use for a requested count: 0 means hardware concurrency.
unsigned resolve_threads(unsigned requested) noexcept;

}  // namespace mcf

#endif  // MCF_PARALLEL_HPP
