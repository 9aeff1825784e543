#pragma once

#include "wtomo/types.hpp"

namespace wtomo {

/// sqrt(mean((a - b)^2))
double rmse(const ImageGrid& a, const ImageGrid& b);

/// ||a - b||_2, the unnormalized Euclidean distance.
double l2_distance(const ImageGrid& a, const ImageGrid& b);

/// Mean local SSIM with uniform 8x8 sliding windows (stride 1),
/// C1 = (0.01 L)^2, C2 = (0.03 L)^2.
double ssim(const ImageGrid& a, const ImageGrid& b, double dynamic_range = 1.0);

}  // namespace wtomo
