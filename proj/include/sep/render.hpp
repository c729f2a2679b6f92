#pragma once

#include <string>

#include "sep/barrier.hpp"
#include "sep/measure.hpp"

namespace sep {

struct RenderOptions {
  double width = 420.0;   // per panel
  double height = 420.0;
  bool dual_panel = true;  // also draw the D x R translation
};

// Barrier picture in the (max, min) phase plane: diagonal, violet v-lines,
// hot-pink h-lines with their downward tails; optionally a second panel with
// the doubled-axis inverse-barrier translation.
std::string render_barrier_svg(const VhBarrier& b, const DiscreteMeasure& lambda,
                               const DiscreteMeasure& mu,
                               const RenderOptions& options = {});

}  // namespace sep
