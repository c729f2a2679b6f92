#include "sep/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sep/numeric.hpp"

namespace sep {

VhBarrier::VhBarrier(std::vector<VLine> v_lines, std::vector<HLine> h_lines) {
  for (const auto& v : v_lines) {
    if (!std::isfinite(v.level) || !std::isfinite(v.depth))
      throw std::invalid_argument("VhBarrier: non-finite v-line");
    if (v.depth > v.level)
      throw std::invalid_argument("VhBarrier: v-line depth above its level");
  }
  for (const auto& h : h_lines) {
    if (!std::isfinite(h.level) || !std::isfinite(h.right_end))
      throw std::invalid_argument("VhBarrier: non-finite h-line");
    if (h.right_end < h.level)
      throw std::invalid_argument("VhBarrier: h-line right end left of its level");
  }
  std::sort(v_lines.begin(), v_lines.end(),
            [](const VLine& a, const VLine& b) { return a.level < b.level; });
  std::sort(h_lines.begin(), h_lines.end(),
            [](const HLine& a, const HLine& b) { return a.level < b.level; });
  for (const auto& v : v_lines) {
    if (!v_.empty() && v_.back().level == v.level) {
      v_.back().depth = std::min(v_.back().depth, v.depth);
    } else {
      v_.push_back(v);
    }
  }
  for (const auto& h : h_lines) {
    if (!h_.empty() && h_.back().level == h.level) {
      h_.back().right_end = std::max(h_.back().right_end, h.right_end);
    } else {
      h_.push_back(h);
    }
  }
}

const VLine* VhBarrier::v_line_at(double level) const {
  auto it = std::lower_bound(v_.begin(), v_.end(), level,
                             [](const VLine& v, double x) { return v.level < x; });
  if (it != v_.end() && it->level == level) return &*it;
  return nullptr;
}

const HLine* VhBarrier::h_line_at(double level) const {
  auto it = std::lower_bound(h_.begin(), h_.end(), level,
                             [](const HLine& h, double x) { return h.level < x; });
  if (it != h_.end() && it->level == level) return &*it;
  return nullptr;
}

std::vector<double> VhBarrier::coordinates() const {
  std::vector<double> out;
  out.reserve(2 * (v_.size() + h_.size()));
  for (const auto& v : v_) {
    out.push_back(v.level);
    out.push_back(v.depth);
  }
  for (const auto& h : h_) {
    out.push_back(h.level);
    out.push_back(h.right_end);
  }
  return out;
}

bool vh_hit(const VhBarrier& b, double max, double min, HitConvention convention) {
  if (max < min) throw std::invalid_argument("vh_hit: max < min");
  const bool closed = convention == HitConvention::Closed;
  if (const VLine* v = b.v_line_at(max)) {
    if (closed ? min >= v->depth : min > v->depth) return true;
  }
  if (const HLine* h = b.h_line_at(min)) {
    if (closed ? max <= h->right_end : max < h->right_end) return true;
  }
  // Downward tail {level} x (-inf, level] of an h-line: max equals the level.
  if (const HLine* h = b.h_line_at(max)) {
    (void)h;
    return true;
  }
  return false;
}

VhBarrier barrier_union(const VhBarrier& a, const VhBarrier& b) {
  std::vector<VLine> v(a.v_lines());
  v.insert(v.end(), b.v_lines().begin(), b.v_lines().end());
  std::vector<HLine> h(a.h_lines());
  h.insert(h.end(), b.h_lines().begin(), b.h_lines().end());
  return VhBarrier(std::move(v), std::move(h));
}

int dpoint_cmp(const DPoint& a, const DPoint& b) {
  if (a.side != b.side) return a.side == DPoint::Side::Left ? -1 : 1;
  if (a.value == b.value) return 0;
  const bool less = a.side == DPoint::Side::Left ? a.value > b.value : a.value < b.value;
  return less ? -1 : 1;
}

DBarrier::DBarrier(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.level < b.level; });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].level == entries_[i - 1].level)
      throw std::invalid_argument("DBarrier: duplicate level");
  }
}

const DPoint* DBarrier::rightmost_at(double level) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), level,
                             [](const Entry& e, double x) { return e.level < x; });
  if (it != entries_.end() && it->level == level) return &it->rightmost;
  return nullptr;
}

bool DBarrier::contains(const DPoint& d, double level, bool strict) const {
  const DPoint* cap = rightmost_at(level);
  if (!cap) return false;
  if (!strict) return dpoint_le(d, *cap);
  // Strict membership realizes the fine-closure convention on recorded
  // states; values within the engine's grid tolerance are the same critical
  // level and do not count as strictly inside.
  if (d.side != cap->side) return d.side == DPoint::Side::Left;
  return d.side == DPoint::Side::Left ? d.value > cap->value + 1e-12
                                      : d.value < cap->value - 1e-12;
}

DBarrier to_dbarrier(const VhBarrier& b) {
  std::vector<DBarrier::Entry> entries;
  auto add = [&entries](double level, DPoint cap) {
    for (auto& e : entries) {
      if (e.level == level) {
        if (dpoint_lt(e.rightmost, cap)) e.rightmost = cap;
        return;
      }
    }
    entries.push_back({level, cap});
  };
  for (const auto& v : b.v_lines()) add(v.level, DPoint::left(v.depth));
  for (const auto& h : b.h_lines()) add(h.level, DPoint::right(h.right_end));
  return DBarrier(std::move(entries));
}

TimeSpaceBarrier::TimeSpaceBarrier(TimeSpaceKind kind, std::vector<Entry> entries)
    : kind_(kind), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (!std::isfinite(e.level))
      throw std::invalid_argument("TimeSpaceBarrier: non-finite level");
    if (std::isnan(e.time_threshold) || e.time_threshold < 0.0)
      throw std::invalid_argument("TimeSpaceBarrier: threshold must be >= 0 or +inf");
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.level < b.level; });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].level == entries_[i - 1].level)
      throw std::invalid_argument("TimeSpaceBarrier: duplicate level");
  }
}

std::vector<double> TimeSpaceBarrier::levels() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.level);
  return out;
}

std::optional<double> TimeSpaceBarrier::threshold_at(double level) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), level,
                             [](const Entry& e, double x) { return e.level < x; });
  if (it != entries_.end() && it->level == level) return it->time_threshold;
  return std::nullopt;
}

bool TimeSpaceBarrier::in_region(double t, double level) const {
  const auto thr = threshold_at(level);
  if (!thr) return false;
  return kind_ == TimeSpaceKind::RootBarrier ? t >= *thr : t <= *thr;
}

void to_json(nlohmann::json& j, const VhBarrier& b) {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& line : b.v_lines()) v.push_back({{"max", line.level}, {"depth", line.depth}});
  nlohmann::json h = nlohmann::json::array();
  for (const auto& line : b.h_lines()) h.push_back({{"min", line.level}, {"right", line.right_end}});
  j = nlohmann::json{{"v_lines", std::move(v)}, {"h_lines", std::move(h)}};
}

void from_json(const nlohmann::json& j, VhBarrier& b) {
  if (!j.is_object()) throw std::invalid_argument("barrier: expected object");
  for (const auto& [key, _] : j.items()) {
    if (key != "v_lines" && key != "h_lines")
      throw std::invalid_argument("barrier: unknown key '" + key + "'");
  }
  std::vector<VLine> v;
  std::vector<HLine> h;
  if (j.contains("v_lines")) {
    for (const auto& jv : j.at("v_lines")) {
      for (const auto& [key, _] : jv.items()) {
        if (key != "max" && key != "depth")
          throw std::invalid_argument("barrier: unknown v-line key '" + key + "'");
      }
      v.push_back({jv.at("max").get<double>(), jv.at("depth").get<double>()});
    }
  }
  if (j.contains("h_lines")) {
    for (const auto& jh : j.at("h_lines")) {
      for (const auto& [key, _] : jh.items()) {
        if (key != "min" && key != "right")
          throw std::invalid_argument("barrier: unknown h-line key '" + key + "'");
      }
      h.push_back({jh.at("min").get<double>(), jh.at("right").get<double>()});
    }
  }
  b = VhBarrier(std::move(v), std::move(h));
}

void to_json(nlohmann::json& j, const TimeSpaceBarrier& b) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& e : b.entries()) {
    nlohmann::json jt;
    if (std::isinf(e.time_threshold)) {
      jt = "inf";
    } else {
      jt = e.time_threshold;
    }
    levels.push_back({{"level", e.level}, {"threshold", std::move(jt)}});
  }
  j = nlohmann::json{
      {"kind", b.kind() == TimeSpaceKind::RootBarrier ? "root" : "inverse"},
      {"levels", std::move(levels)}};
}

void from_json(const nlohmann::json& j, TimeSpaceBarrier& b) {
  for (const auto& [key, _] : j.items()) {
    if (key != "kind" && key != "levels")
      throw std::invalid_argument("time-space barrier: unknown key '" + key + "'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  TimeSpaceKind k;
  if (kind == "root") {
    k = TimeSpaceKind::RootBarrier;
  } else if (kind == "inverse") {
    k = TimeSpaceKind::InverseBarrier;
  } else {
    throw std::invalid_argument("time-space barrier: kind must be root|inverse");
  }
  std::vector<TimeSpaceBarrier::Entry> entries;
  for (const auto& je : j.at("levels")) {
    for (const auto& [key, _] : je.items()) {
      if (key != "level" && key != "threshold")
        throw std::invalid_argument("time-space barrier: unknown level key '" + key + "'");
    }
    double thr;
    const auto& jt = je.at("threshold");
    if (jt.is_string()) {
      if (jt.get<std::string>() != "inf")
        throw std::invalid_argument("time-space barrier: bad threshold string");
      thr = kInf;
    } else {
      thr = jt.get<double>();
    }
    entries.push_back({je.at("level").get<double>(), thr});
  }
  b = TimeSpaceBarrier(k, std::move(entries));
}

}  // namespace sep
