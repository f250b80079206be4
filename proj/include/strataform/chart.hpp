#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace strataform {

class Chart;
using ChartPtr = std::shared_ptr<const Chart>;

// A coordinate chart. Split charts (total spaces like T*F) keep their fiber
// coordinates last; fiber_count() == 0 means an ordinary chart.
class Chart {
 public:
  static ChartPtr make(std::vector<std::string> names) {
    return std::shared_ptr<const Chart>(new Chart(std::move(names), 0));
  }
  static ChartPtr make_split(std::vector<std::string> base, std::vector<std::string> fiber) {
    const int nf = static_cast<int>(fiber.size());
    for (auto& f : fiber) base.push_back(std::move(f));
    return std::shared_ptr<const Chart>(new Chart(std::move(base), nf));
  }
  // Convenience: coordinates x1..xn.
  static ChartPtr standard(int n) {
    std::vector<std::string> names;
    names.reserve(n);
    for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
    return make(std::move(names));
  }

  int dim() const { return static_cast<int>(names_.size()); }
  int fiber_count() const { return fiber_count_; }
  int base_count() const { return dim() - fiber_count_; }
  bool is_split() const { return fiber_count_ > 0; }
  bool is_fiber_index(int i) const { return i >= base_count(); }

  const std::string& name(int i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }

  int index_of(const std::string& name) const {
    for (int i = 0; i < dim(); ++i)
      if (names_[i] == name) return i;
    return -1;
  }

  friend bool operator==(const Chart& a, const Chart& b) {
    return a.names_ == b.names_ && a.fiber_count_ == b.fiber_count_;
  }
  friend bool operator!=(const Chart& a, const Chart& b) { return !(a == b); }

 private:
  Chart(std::vector<std::string> names, int fiber_count)
      : names_(std::move(names)), fiber_count_(fiber_count) {
    for (std::size_t i = 0; i < names_.size(); ++i)
      for (std::size_t j = i + 1; j < names_.size(); ++j)
        if (names_[i] == names_[j])
          throw std::invalid_argument("Chart: duplicate coordinate name '" + names_[i] + "'");
  }

  std::vector<std::string> names_;
  int fiber_count_;
};

inline void require_same_chart(const ChartPtr& a, const ChartPtr& b, const char* where) {
  if (a == b) return;
  if (a && b && *a == *b) return;
  throw std::invalid_argument(std::string(where) + ": chart mismatch");
}

}  // namespace strataform
