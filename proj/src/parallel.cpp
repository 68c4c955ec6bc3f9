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

#include "mcf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <stdexcept>
#include <thread>

namespace mcf {

namespace {

thread_local bool holding_lock_set = false;

template <typename Fn>
void run_workers(std::size_t count, unsigned threads, Fn&& body) {
  threads = resolve_threads(threads);
  if (threads <= 1 || count <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t k = next.fetch_add(1, std::memory_order_relaxed);
      if (k >= count) return;
      try {
        body(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::vector<std::thread> pool;
  pool.reserve(spawn);
  for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

unsigned resolve_threads(unsigned requested) noexcept {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

LockTable::Guard::Guard(Guard&& other) noexcept
    : table_(other.table_), small_(other.small_), large_(std::move(other.large_)),
      count_(other.count_) {
  other.table_ = nullptr;
  other.count_ = 0;
}

LockTable::Guard& LockTable::Guard::operator=(Guard&& other) noexcept {
  if (this != &other) {
    release();
    table_ = other.table_;
    small_ = other.small_;
    large_ = std::move(other.large_);
    count_ = other.count_;
    other.table_ = nullptr;
    other.count_ = 0;
  }
  return *this;
}

std::span<const std::size_t> LockTable::Guard::slots() const noexcept {
  if (count_ <= small_.size() && large_.empty()) return {small_.data(), count_};
  return large_;
}

void LockTable::Guard::release() noexcept {
  if (!table_) return;
  const auto held = slots();
  for (auto it = held.rbegin(); it != held.rend(); ++it) table_->mutexes_[*it].unlock();
  table_ = nullptr;
  count_ = 0;
  large_.clear();
  holding_lock_set = false;
}

LockTable::Guard LockTable::acquire(std::initializer_list<std::size_t> slots) {
  return acquire(std::span<const std::size_t>(slots.begin(), slots.size()));
}

LockTable::Guard LockTable::acquire(std::span<const std::size_t> slots) {
  Guard g;
  if (slots.size() <= g.small_.size()) {
    std::copy(slots.begin(), slots.end(), g.small_.begin());
    auto first = g.small_.begin();
    auto last = first + static_cast<std::ptrdiff_t>(slots.size());
    std::sort(first, last);
    g.count_ = static_cast<std::size_t>(std::unique(first, last) - first);
  } else {
    g.large_.assign(slots.begin(), slots.end());
    std::sort(g.large_.begin(), g.large_.end());
    g.large_.erase(std::unique(g.large_.begin(), g.large_.end()), g.large_.end());
    g.count_ = g.large_.size();
  }
  return lock_sorted(std::move(g));
}

LockTable::Guard LockTable::lock_sorted(Guard g) {
  if (holding_lock_set) {
    throw std::logic_error("lock set requested while another set is held");
  }
  for (std::size_t s : g.slots()) {
    if (s >= mutexes_.size()) throw std::out_of_range("lock slot out of range");
  }
  for (std::size_t s : g.slots()) mutexes_[s].lock();
  g.table_ = this;
  holding_lock_set = true;
  return g;
}

void parallel_for_users(std::span<const UserId> order, unsigned threads, LockTable& locks,
                        const std::function<void(UserId, LockTable&)>& task) {
  run_workers(order.size(), threads, [&](std::size_t k) { task(order[k], locks); });
}

void parallel_map_rows(std::size_t rows, unsigned threads,
                       const std::function<void(std::size_t)>& task) {
  run_workers(rows, threads, task);
}

}  // namespace mcf
