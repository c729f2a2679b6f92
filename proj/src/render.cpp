#include "sep/render.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <vector>

namespace sep {

namespace {

constexpr const char* kViolet = "#8F00FF";
constexpr const char* kHotPink = "#FF69B4";

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

struct Box {
  double lo, hi;
};

Box value_box(const VhBarrier& b, const DiscreteMeasure& lambda,
              const DiscreteMeasure& mu) {
  std::vector<double> vals = b.coordinates();
  for (const auto& a : lambda.atoms()) vals.push_back(a.x);
  for (const auto& a : mu.atoms()) vals.push_back(a.x);
  if (vals.empty()) vals = {-1.0, 1.0};
  const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
  double lo = *mn, hi = *mx;
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.15 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string render_barrier_svg(const VhBarrier& b, const DiscreteMeasure& lambda,
                               const DiscreteMeasure& mu, const RenderOptions& opt) {
  const Box box = value_box(b, lambda, mu);
  const double W = opt.width, H = opt.height;
  const int panels = opt.dual_panel ? 2 : 1;
  const double margin = 30.0;

  auto sx = [&](double v, int panel) {
    const double u = (v - box.lo) / (box.hi - box.lo);
    return panel * (W + margin) + margin + u * (W - 2 * margin);
  };
  auto sy = [&](double v) {
    const double u = (v - box.lo) / (box.hi - box.lo);
    return H - margin - u * (H - 2 * margin);
  };
  // Doubled axis: left half carries the flipped copy, right half the reals.
  auto sd = [&](const DPoint& d) {
    const double half = 0.5 * (W - 2 * margin);
    const double u = (d.value - box.lo) / (box.hi - box.lo);
    const double x0 = (W + margin) + margin;
    return d.side == DPoint::Side::Left ? x0 + (1.0 - u) * half : x0 + half + u * half;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << num(panels * W + (panels - 1) * margin) << "\" height=\"" << num(H)
      << "\" viewBox=\"0 0 " << num(panels * W + (panels - 1) * margin) << " "
      << num(H) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Panel 1: (max, min) phase plane.
  svg << "<g stroke=\"#333\" stroke-width=\"1\" fill=\"none\">\n";
  svg << "<rect x=\"" << num(margin) << "\" y=\"" << num(margin) << "\" width=\""
      << num(W - 2 * margin) << "\" height=\"" << num(H - 2 * margin) << "\"/>\n";
  svg << "<line x1=\"" << num(sx(box.lo, 0)) << "\" y1=\"" << num(sy(box.lo))
      << "\" x2=\"" << num(sx(box.hi, 0)) << "\" y2=\"" << num(sy(box.hi))
      << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  svg << "</g>\n";

  for (const auto& h : b.h_lines()) {
    svg << "<line x1=\"" << num(sx(h.level, 0)) << "\" y1=\"" << num(sy(h.level))
        << "\" x2=\"" << num(sx(h.right_end, 0)) << "\" y2=\"" << num(sy(h.level))
        << "\" stroke=\"" << kHotPink << "\" stroke-width=\"3\"/>\n";
    svg << "<line x1=\"" << num(sx(h.level, 0)) << "\" y1=\"" << num(sy(h.level))
        << "\" x2=\"" << num(sx(h.level, 0)) << "\" y2=\"" << num(H - margin)
        << "\" stroke=\"" << kHotPink
        << "\" stroke-width=\"3\" stroke-dasharray=\"6 4\"/>\n";
  }
  for (const auto& v : b.v_lines()) {
    svg << "<line x1=\"" << num(sx(v.level, 0)) << "\" y1=\"" << num(sy(v.depth))
        << "\" x2=\"" << num(sx(v.level, 0)) << "\" y2=\"" << num(sy(v.level))
        << "\" stroke=\"" << kViolet << "\" stroke-width=\"3\"/>\n";
  }
  for (const auto& a : lambda.atoms()) {
    svg << "<circle cx=\"" << num(sx(a.x, 0)) << "\" cy=\"" << num(sy(a.x))
        << "\" r=\"3.5\" fill=\"#333\"/>\n";
  }
  for (const auto& a : mu.atoms()) {
    svg << "<line x1=\"" << num(sx(a.x, 0)) << "\" y1=\"" << num(H - margin)
        << "\" x2=\"" << num(sx(a.x, 0)) << "\" y2=\"" << num(H - margin + 6)
        << "\" stroke=\"#333\" stroke-width=\"2\"/>\n";
  }

  if (opt.dual_panel) {
    const double x0 = W + margin + margin;
    const double xmid = x0 + 0.5 * (W - 2 * margin);
    svg << "<g stroke=\"#333\" stroke-width=\"1\" fill=\"none\">\n";
    svg << "<rect x=\"" << num(x0) << "\" y=\"" << num(margin) << "\" width=\""
        << num(W - 2 * margin) << "\" height=\"" << num(H - 2 * margin) << "\"/>\n";
    svg << "<line x1=\"" << num(xmid) << "\" y1=\"" << num(margin) << "\" x2=\""
        << num(xmid) << "\" y2=\"" << num(H - margin)
        << "\" stroke=\"#bbb\" stroke-dasharray=\"3 3\"/>\n";
    svg << "</g>\n";
    // Each level's region extends from the far left of D to its rightmost
    // point (inverse-barrier structure).
    const DBarrier db = to_dbarrier(b);
    for (const auto& e : db.entries()) {
      const bool right_half = e.rightmost.side == DPoint::Side::Right;
      svg << "<line x1=\"" << num(x0) << "\" y1=\"" << num(sy(e.level)) << "\" x2=\""
          << num(sd(e.rightmost)) << "\" y2=\"" << num(sy(e.level)) << "\" stroke=\""
          << (right_half ? kHotPink : kViolet) << "\" stroke-width=\"3\"/>\n";
    }
  }

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace sep
