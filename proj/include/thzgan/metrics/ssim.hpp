#pragma once

#include <cstddef>
#include <span>

#include "thzgan/metrics/pdap.hpp"

namespace thzgan::metrics {

inline constexpr std::size_t kSsimWindow = 8;

/// Mean local SSIM of two row-major images with values in [0, range].
/// Windows are kSsimWindow square, uniform, stride 1. Images smaller than a
/// window are compared as a single global window.
double ssim_image(std::span<const double> a, std::span<const double> b, std::size_t rows, std::size_t cols,
                  double range);

/// SSIM of two PDAPs over their dB views, offset so the floor maps to 0 and
/// the dynamic range runs from the floor to the larger observed maximum.
/// Throws ShapeError when the grid configs differ.
double ssim(const PdapGrid& a, const PdapGrid& b);

}  // namespace thzgan::metrics
