#pragma once

#include "gf/grid.hpp"

namespace gf {

/// Fourth-order central differences along one real axis. Periodic axes wrap
/// exactly (index arithmetic modulo the resolution). On bounded axes only the
/// rows where the full 5-point stencil fits are written; the two rows at each
/// edge are zeroed and are never part of the owned region by construction.
/// order is 1 or 2.
void fd_axis(const Field& in, Field& out, int axis, int order);
Field fd_axis(const Field& in, int axis, int order);

/// holomorphic derivative d/dz_c = (d/dx - i d/dy)/2 of every component
Field dz(const Field& in, int cpair);
/// antiholomorphic derivative d/dzbar_c = (d/dx + i d/dy)/2
Field dzbar(const Field& in, int cpair);
/// d^2/(dz_c dzbar_c) = (d^2/dx^2 + d^2/dy^2)/4, a single stencil level
Field dzdzbar_same(const Field& in, int cpair);

} // namespace gf
