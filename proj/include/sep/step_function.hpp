#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sep/numeric.hpp"

namespace sep {

// Right-continuous step map: value(x) is the value attached to the largest
// breakpoint <= x, and `below` to the left of every breakpoint.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<std::pair<double, double>> breakpoints, double below = -kInf)
      : pts_(std::move(breakpoints)), below_(below) {
    std::sort(pts_.begin(), pts_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < pts_.size(); ++i) {
      if (pts_[i].first == pts_[i - 1].first)
        throw std::invalid_argument("StepFunction: duplicate breakpoint");
    }
  }

  double operator()(double x) const {
    auto it = std::upper_bound(
        pts_.begin(), pts_.end(), x,
        [](double v, const auto& p) { return v < p.first; });
    if (it == pts_.begin()) return below_;
    return std::prev(it)->second;
  }

  const std::vector<std::pair<double, double>>& breakpoints() const { return pts_; }
  double below() const { return below_; }
  bool empty() const { return pts_.empty(); }

  bool operator==(const StepFunction&) const = default;

 private:
  std::vector<std::pair<double, double>> pts_;
  double below_ = -kInf;
};

}  // namespace sep
