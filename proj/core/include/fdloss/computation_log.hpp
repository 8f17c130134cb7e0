#pragma once

#include <string>
#include <vector>

namespace fdloss {

// Caller-owned sink for numerical diagnostics (clamped eigenvalues, floored FD values,
// degenerate gradients). Library functions take it by pointer and skip logging on nullptr.
class ComputationLog {
 public:
  enum class Level { kInfo, kWarning };

  struct Entry {
    Level level;
    std::string message;
  };

  void info(std::string message) { entries_.push_back({Level::kInfo, std::move(message)}); }
  void warn(std::string message) { entries_.push_back({Level::kWarning, std::move(message)}); }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t warning_count() const noexcept;
  void clear() noexcept { entries_.clear(); }

 private:
  std::vector<Entry> entries_;
};

inline std::size_t ComputationLog::warning_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.level == Level::kWarning ? 1 : 0;
  return n;
}

}  // namespace fdloss
