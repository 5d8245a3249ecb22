#pragma once

// Kinodynamic images: a 3 x 9 x M RGB grid, one pixel per (feature, step).
// Storage is channel-major so an image doubles as a network input tensor.

#include <array>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "kdi/dataset.hpp"

namespace kdi {

using Rgb = std::array<double, 3>;

enum class ColormapKind { kDiverging, kSequential };

ColormapKind parse_colormap(const std::string& name);
const char* to_string(ColormapKind kind);
ColormapKind default_colormap(TaskKind task);  // diverging for cut, sequential for push

// blue (0,0,1) -> white (1,1,1) at 0.5 -> red (1,0,0); input clipped to [0,1].
Rgb colormap_diverging(double v);
// (v, 0, 1 - v): blue -> red without a neutral midpoint.
Rgb colormap_sequential(double v);
Rgb apply_colormap(ColormapKind kind, double v);

enum class ScalerKind { kTrain, kViz };
const char* to_string(ScalerKind kind);

using AnyScaler = std::variant<TrainScaler, VizScaler>;

class Image {
 public:
  Image() = default;
  Image(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0)
      : channels_(channels), height_(height), width_(width),
        data_(channels * height * width, fill) {}

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  double& at(std::size_t c, std::size_t y, std::size_t x) { return data_[(c * height_ + y) * width_ + x]; }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * height_ + y) * width_ + x];
  }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t channels_ = 0, height_ = 0, width_ = 0;
  std::vector<double> data_;
};

struct KinodynamicImage {
  Image pixels;  // 3 x 9 x M, values in [0,1]
  ScalerKind scaler = ScalerKind::kTrain;
  ColormapKind colormap = ColormapKind::kDiverging;
  std::string trial_id;
  std::size_t block_index = 0;
};

KinodynamicImage encode_image(const Block& block, const AnyScaler& scaler, ColormapKind colormap);
// Colormap an already-scaled 9 x M grid.
Image colorize(const FeatureGrid& scaled, ColormapKind colormap);

// 8-bit encoders. Each logical pixel is repeated `upscale` times in both axes;
// channel value = round(255 * v).
std::string encode_ppm(const Image& image, std::size_t upscale = 1);
std::string encode_png(const Image& image, std::size_t upscale = 1);
void export_image(const Image& image, std::size_t upscale, const std::filesystem::path& path);

// P6 decoder for round trips; returns values k/255.
Image decode_ppm(const std::string& bytes);

std::string image_filename(const KinodynamicImage& image);  // <trial>_<block>_<scaler>_<map>.ppm

}  // namespace kdi
