#include <algorithm>

#include "kdi/error.hpp"
#include "kdi/imaging.hpp"

namespace kdi {

ColormapKind parse_colormap(const std::string& name) {
  if (name == "diverging") return ColormapKind::kDiverging;
  if (name == "sequential") return ColormapKind::kSequential;
  throw ValidationError("unknown colormap '" + name + "' (expected diverging|sequential)");
}

const char* to_string(ColormapKind kind) {
  return kind == ColormapKind::kDiverging ? "diverging" : "sequential";
}

ColormapKind default_colormap(TaskKind task) {
  return task == TaskKind::kCut ? ColormapKind::kDiverging : ColormapKind::kSequential;
}

const char* to_string(ScalerKind kind) { return kind == ScalerKind::kTrain ? "train" : "viz"; }

Rgb colormap_diverging(double v) {
  v = std::clamp(v, 0.0, 1.0);
  if (v <= 0.5) return {2.0 * v, 2.0 * v, 1.0};
  return {1.0, 2.0 - 2.0 * v, 2.0 - 2.0 * v};
}

Rgb colormap_sequential(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return {v, 0.0, 1.0 - v};
}

Rgb apply_colormap(ColormapKind kind, double v) {
  return kind == ColormapKind::kDiverging ? colormap_diverging(v) : colormap_sequential(v);
}

Image colorize(const FeatureGrid& scaled, ColormapKind colormap) {
  Image img(3, kFeatureRows, scaled.width());
  for (std::size_t r = 0; r < kFeatureRows; ++r) {
    for (std::size_t t = 0; t < scaled.width(); ++t) {
      const Rgb rgb = apply_colormap(colormap, scaled.at(r, t));
      for (std::size_t c = 0; c < 3; ++c) img.at(c, r, t) = rgb[c];
    }
  }
  return img;
}

KinodynamicImage encode_image(const Block& block, const AnyScaler& scaler, ColormapKind colormap) {
  require(block.features.width() > 0, "encode_image: empty block");
  KinodynamicImage out;
  out.colormap = colormap;
  out.trial_id = block.trial_id;
  out.block_index = block.index;
  const FeatureGrid scaled = std::visit(
      [&](const auto& s) {
        require(s.fitted(), "encode_image: scaler is not fitted");
        return s.apply(block.features);
      },
      scaler);
  out.scaler = std::holds_alternative<TrainScaler>(scaler) ? ScalerKind::kTrain : ScalerKind::kViz;
  out.pixels = colorize(scaled, colormap);
  return out;
}

std::string image_filename(const KinodynamicImage& image) {
  return image.trial_id + "_" + std::to_string(image.block_index) + "_" + to_string(image.scaler) +
         "_" + to_string(image.colormap) + ".ppm";
}

}  // namespace kdi
