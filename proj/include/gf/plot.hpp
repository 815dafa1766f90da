#pragma once

#include "gf/core.hpp"

namespace gf {

/// Render a run-directory monitor CSV (columns t,min_value,argmin_index,
/// field_scale,dt) as a self-contained SVG line plot of min_value against t,
/// with the +-1e-5 tolerance band drawn. Byte-deterministic for identical
/// input.
void plot_csv_to_svg(const std::string& csv_path, const std::string& svg_path);

} // namespace gf
