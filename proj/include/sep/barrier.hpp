#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

namespace sep {

// Vertical line {level} x [depth, level] in (max, min) phase space: stops a
// path at a new running maximum equal to `level` when its running minimum is
// still above `depth`.
struct VLine {
  double level;
  double depth;
  bool operator==(const VLine&) const = default;
};

// Horizontal line [level, right_end] x {level} together with the downward
// tail {level} x (-inf, level]: the horizontal part stops a path at a new
// running minimum equal to `level` when its running maximum is below
// `right_end`; the tail stops any path whose running maximum reaches `level`.
struct HLine {
  double level;
  double right_end;
  bool operator==(const HLine&) const = default;
};

enum class HitConvention { Closed, Open };

// Perkins target set R = R1 u R2 in (max, min) phase space. Canonicalized on
// construction (lines sorted by level, same-level lines merged), so equality
// of barriers is structural equality.
class VhBarrier {
 public:
  VhBarrier() = default;
  VhBarrier(std::vector<VLine> v_lines, std::vector<HLine> h_lines);

  const std::vector<VLine>& v_lines() const { return v_; }
  const std::vector<HLine>& h_lines() const { return h_; }
  bool empty() const { return v_.empty() && h_.empty(); }

  const VLine* v_line_at(double level) const;
  const HLine* h_line_at(double level) const;

  // Every level, depth and right_end; these are the coordinates the critical
  // grid must contain.
  std::vector<double> coordinates() const;

  bool operator==(const VhBarrier&) const = default;

 private:
  std::vector<VLine> v_;
  std::vector<HLine> h_;
};

// Geometric point-in-set test for (max, min), closed segments by default.
bool vh_hit(const VhBarrier& b, double max, double min,
            HitConvention convention = HitConvention::Closed);

// Set union; overlapping lines at a level merge by extending extents.
VhBarrier barrier_union(const VhBarrier& a, const VhBarrier& b);

// Point of the doubled axis D = R' u R; Left carries the flipped copy R'.
struct DPoint {
  enum class Side { Left, Right };
  Side side;
  double value;

  static DPoint left(double v) { return {Side::Left, v}; }
  static DPoint right(double v) { return {Side::Right, v}; }
  bool operator==(const DPoint&) const = default;
};

// Total order <=_D: Left(a) <= Right(b) always; Left reversed, Right plain.
int dpoint_cmp(const DPoint& a, const DPoint& b);  // -1 / 0 / +1
inline bool dpoint_le(const DPoint& a, const DPoint& b) { return dpoint_cmp(a, b) <= 0; }
inline bool dpoint_lt(const DPoint& a, const DPoint& b) { return dpoint_cmp(a, b) < 0; }

// Inverse barrier in D x R: at each level the region {d : d <=_D rightmost}.
class DBarrier {
 public:
  struct Entry {
    double level;
    DPoint rightmost;
    bool operator==(const Entry&) const = default;
  };

  DBarrier() = default;
  explicit DBarrier(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  const DPoint* rightmost_at(double level) const;

  // Membership of (d, level); strict uses d <_D rightmost (the fine-closure
  // convention on recorded states used by the engine).
  bool contains(const DPoint& d, double level, bool strict = false) const;

  bool operator==(const DBarrier&) const = default;

 private:
  std::vector<Entry> entries_;
};

DBarrier to_dbarrier(const VhBarrier& b);

// Time-space barriers for the Root and Rost baselines. The region is
// {(t, level) : t >= threshold} for RootBarrier and {t <= threshold} for
// InverseBarrier; thresholds may be +inf.
enum class TimeSpaceKind { RootBarrier, InverseBarrier };

class TimeSpaceBarrier {
 public:
  struct Entry {
    double level;
    double time_threshold;
    bool operator==(const Entry&) const = default;
  };

  TimeSpaceBarrier() = default;
  TimeSpaceBarrier(TimeSpaceKind kind, std::vector<Entry> entries);

  TimeSpaceKind kind() const { return kind_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<double> levels() const;
  std::optional<double> threshold_at(double level) const;
  bool in_region(double t, double level) const;

  bool operator==(const TimeSpaceBarrier&) const = default;

 private:
  TimeSpaceKind kind_ = TimeSpaceKind::RootBarrier;
  std::vector<Entry> entries_;
};

void to_json(nlohmann::json& j, const VhBarrier& b);
void from_json(const nlohmann::json& j, VhBarrier& b);
void to_json(nlohmann::json& j, const TimeSpaceBarrier& b);
void from_json(const nlohmann::json& j, TimeSpaceBarrier& b);

}  // namespace sep
