#include <algorithm>

#include "kdi/error.hpp"
#include "kdi/explain.hpp"

namespace kdi {

Image render_overlay(const Image& image, const SaliencyMap& saliency) {
  require(image.channels() == 3, "overlay: image must be RGB");
  const Tensor& s = saliency.values;
  require(s.rank() == 2 && s.dim(0) == image.height() && s.dim(1) == image.width(),
          "overlay: saliency shape " + shape_string(s.shape()) + " does not match image " +
              std::to_string(image.height()) + "x" + std::to_string(image.width()));
  const std::size_t H = image.height(), W = image.width();
  Image out(3, H, 2 * W + 1, 0.0);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t x = 0; x < W; ++x) out.at(c, y, x) = image.at(c, y, x);
      out.at(c, y, W) = 1.0;
    }
    for (std::size_t x = 0; x < W; ++x) out.at(0, y, W + 1 + x) = std::clamp(s[y * W + x], 0.0, 1.0);
  }
  return out;
}

std::string overlay_filename(const std::string& trial_id, std::size_t block_index,
                             const std::string& extension) {
  return trial_id + "_" + std::to_string(block_index) + "_overlay" + extension;
}

}  // namespace kdi
