#include "farpt/svg.hpp"

#include "farpt/io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace farpt {

void write_grid_svg(std::ostream& os, const SuccessGrid& grid, const std::string& manifest_ref) {
  const auto& ss = grid.spec.sparsity;
  const auto& ns = grid.spec.measurements;
  constexpr double cell_w = 12.0;
  constexpr double cell_h = 8.0;
  constexpr double margin = 40.0;
  const double width = ss.size() * cell_w;
  const double height = ns.size() * cell_h;

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(width + 2 * margin) << "\" height=\""
     << format_double(height + 2 * margin) << "\">\n";
  if (!manifest_ref.empty()) os << "<!-- manifest: " << manifest_ref << " -->\n";
  os << "<title>" << grid.ensemble.describe() << "</title>\n";

  // Measurement axis grows upward.
  auto y_of = [&](double n_value) {
    const double lo = ns.front();
    const double hi = ns.back();
    const double t = hi > lo ? (n_value - lo) / (hi - lo) : 0.0;
    return margin + height - cell_h / 2 - t * (height - cell_h);
  };
  auto x_of = [&](std::size_t i) { return margin + (static_cast<double>(i) + 0.5) * cell_w; };

  for (std::size_t i = 0; i < ss.size(); ++i) {
    for (std::size_t k = 0; k < ns.size(); ++k) {
      const int level = static_cast<int>(std::lround(255.0 * grid.at(i, k).fraction()));
      os << "<rect x=\"" << format_double(margin + i * cell_w) << "\" y=\""
         << format_double(margin + height - (k + 1) * cell_h) << "\" width=\"" << format_double(cell_w)
         << "\" height=\"" << format_double(cell_h) << "\" fill=\"rgb(" << level << ',' << level << ',' << level
         << ")\"/>\n";
    }
  }

  os << "<polyline fill=\"none\" stroke=\"red\" stroke-width=\"1.5\" points=\"";
  bool first = true;
  for (std::size_t i = 0; i < ss.size(); ++i) {
    double v = 0.0;
    try {
      v = grid.ensemble.theoretical_curve(ss[i]);
    } catch (const std::exception&) {
      continue;
    }
    v = std::clamp(v, static_cast<double>(ns.front()), static_cast<double>(ns.back()));
    os << (first ? "" : " ") << format_fixed(x_of(i), 2) << ',' << format_fixed(y_of(v), 2);
    first = false;
  }
  os << "\"/>\n";
  os << "<text x=\"" << format_double(margin) << "\" y=\"" << format_double(margin + height + 25)
     << "\" font-size=\"10\">sparsity " << ss.front() << ".." << ss.back() << "</text>\n";
  os << "<text x=\"5\" y=\"" << format_double(margin - 10) << "\" font-size=\"10\">n " << ns.front() << ".."
     << ns.back() << "</text>\n";
  os << "</svg>\n";
}

} // namespace farpt
