#pragma once

#include "wtomo/types.hpp"

namespace wtomo {

/// 4x4 grid with a 3-voxel right triangle of ones at the center:
/// voxels (1,1), (2,1), (1,2) in (ix, iy).
ImageGrid make_triangle4();

/// Two binary right-triangle wedges filling opposite halves of the field,
/// separated by a gap along the anti-diagonal, inside a zero border.
ImageGrid make_two_wedge(int nx, int ny);

}  // namespace wtomo
