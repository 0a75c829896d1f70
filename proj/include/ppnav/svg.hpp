#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "errors.hpp"
#include "tree.hpp"
#include "vec.hpp"

namespace ppnav {

struct SvgStyle {
  double size = 800.0;  // canvas side in px
  double stroke = 0.6;
  double origin_radius = 4.0;
  std::string edge_color = "#1f4e79";
  std::string origin_color = "#c0392b";
};

// One <line> per tree edge plus a circle at O. Coordinates are mapped from
// the bounding square of the points; output depends only on the input.
inline std::string render_tree_svg(const NavTree& t, const std::vector<Vec<2>>& pts, const SvgStyle& st = {}) {
  require(pts.size() == t.size(), "tree and point count differ");
  require(st.size > 0.0, "canvas size must be positive");
  double R = 0.0;
  for (const auto& p : pts) R = std::max({R, std::fabs(p[0]), std::fabs(p[1])});
  if (R == 0.0) R = 1.0;
  const double half = st.size / 2.0, scale = 0.95 * half / R;
  auto X = [&](const Vec<2>& p) { return format_double(half + scale * p[0]); };
  auto Y = [&](const Vec<2>& p) { return format_double(half - scale * p[1]); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(st.size) << "\" height=\""
     << format_double(st.size) << "\" viewBox=\"0 0 " << format_double(st.size) << ' ' << format_double(st.size)
     << "\">\n";
  os << "<g stroke=\"" << st.edge_color << "\" stroke-width=\"" << format_double(st.stroke) << "\">\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i == t.root) continue;
    const auto& a = pts[i];
    const auto& b = pts[t.parent[i]];
    os << "<line x1=\"" << X(a) << "\" y1=\"" << Y(a) << "\" x2=\"" << X(b) << "\" y2=\"" << Y(b) << "\"/>\n";
  }
  os << "</g>\n";
  const auto& o = pts[t.root];
  os << "<circle cx=\"" << X(o) << "\" cy=\"" << Y(o) << "\" r=\"" << format_double(st.origin_radius) << "\" fill=\""
     << st.origin_color << "\"/>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace ppnav
