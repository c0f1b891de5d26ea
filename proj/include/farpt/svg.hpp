#pragma once

#include "farpt/montecarlo.hpp"

#include <iosfwd>
#include <string>

namespace farpt {

/// Grayscale heatmap of success fractions (white = 1, black = 0), sparsity on x and
/// measurements on y, with the ensemble's theoretical curve drawn over it.
void write_grid_svg(std::ostream& os, const SuccessGrid& grid, const std::string& manifest_ref = {});

} // namespace farpt
