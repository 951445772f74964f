#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace strictlyap::detail {

/// Thread-safe memo of a pure function of time keyed on the exact argument.
/// Cleared wholesale once it holds `capacity` entries.
template <typename T>
class TimeMemo {
 public:
  explicit TimeMemo(std::function<T(double)> fn, std::size_t capacity = 1u << 18)
      : fn_(std::move(fn)), capacity_(capacity) {}

  T operator()(double t) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = values_.find(t);
      if (it != values_.end()) return it->second;
    }
    T value = fn_(t);
    std::lock_guard<std::mutex> lock(mutex_);
    if (values_.size() >= capacity_) values_.clear();
    values_.emplace(t, value);
    return value;
  }

 private:
  std::function<T(double)> fn_;
  std::size_t capacity_;
  std::mutex mutex_;
  std::unordered_map<double, T> values_;
};

template <typename T>
std::shared_ptr<TimeMemo<T>> make_memo(std::function<T(double)> fn) {
  return std::make_shared<TimeMemo<T>>(std::move(fn));
}

}  // namespace strictlyap::detail
