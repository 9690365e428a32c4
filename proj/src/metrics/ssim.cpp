#include "thzgan/metrics/ssim.hpp"

#include <algorithm>
#include <vector>

#include "thzgan/errors.hpp"

namespace thzgan::metrics {

namespace {

double window_ssim(const double* a, const double* b, std::size_t stride, std::size_t h, std::size_t w, double c1,
                   double c2) {
  const double n = static_cast<double>(h * w);
  double sa = 0.0, sb = 0.0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      sa += a[r * stride + c];
      sb += b[r * stride + c];
    }
  }
  const double ma = sa / n;
  const double mb = sb / n;
  double vaa = 0.0, vbb = 0.0, vab = 0.0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double da = a[r * stride + c] - ma;
      const double db = b[r * stride + c] - mb;
      vaa += da * da;
      vbb += db * db;
      vab += da * db;
    }
  }
  vaa /= n;
  vbb /= n;
  vab /= n;
  return ((2.0 * ma * mb + c1) * (2.0 * vab + c2)) / ((ma * ma + mb * mb + c1) * (vaa + vbb + c2));
}

}  // namespace

double ssim_image(std::span<const double> a, std::span<const double> b, std::size_t rows, std::size_t cols,
                  double range) {
  if (a.size() != rows * cols || b.size() != rows * cols || rows == 0 || cols == 0) {
    throw ShapeError("ssim: images do not conform to " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!(range > 0.0)) range = 1.0;
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);
  if (rows < kSsimWindow || cols < kSsimWindow) return window_ssim(a.data(), b.data(), cols, rows, cols, c1, c2);

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r + kSsimWindow <= rows; ++r) {
    for (std::size_t c = 0; c + kSsimWindow <= cols; ++c) {
      const std::size_t offset = r * cols + c;
      total += window_ssim(a.data() + offset, b.data() + offset, cols, kSsimWindow, kSsimWindow, c1, c2);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double ssim(const PdapGrid& a, const PdapGrid& b) {
  if (!(a.config() == b.config())) throw ShapeError("ssim: grid configurations do not conform");
  const double floor = a.config().floor_db;
  auto ia = a.db();
  auto ib = b.db();
  double peak = 0.0;
  for (auto* image : {&ia, &ib}) {
    for (auto& v : *image) {
      v -= floor;
      peak = std::max(peak, v);
    }
  }
  return ssim_image(ia, ib, a.rows(), a.cols(), peak);
}

}  // namespace thzgan::metrics
