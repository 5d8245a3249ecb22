#pragma once

// Grad-CAM saliency for EventNet predictions, dominant features, overlay
// panels and per-outcome feature utilization.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kdi/imaging.hpp"
#include "kdi/models.hpp"

namespace kdi {

// Raw class activation map from activations A (K x H x W') and dy/dA:
//   alpha_k = mean over H x W' of dy/dA_k,  map = ReLU(sum_k alpha_k A_k).
Tensor gradcam_map(const Tensor& activations, const Tensor& gradients);

// Raw H x W' map for one cnn trace, seeded with the target-class logit.
Tensor gradcam(const EventNet& net, const NetworkTrace& trace, std::size_t target_class);

enum class Interpolation { kLinear, kNearest };
Interpolation parse_interpolation(const std::string& name);

// Widens every row to `width` columns. Linear mode aligns endpoints: source
// column j sits at j (width - 1) / (W' - 1). W' = 1 broadcasts.
Tensor upsample_time(const Tensor& raw, std::size_t width,
                     Interpolation mode = Interpolation::kLinear);

struct SaliencyMap {
  Tensor values;  // H x M, >= 0, max 1 unless all_zero
  std::size_t target_class = 0;
  std::string trial_id;
  std::size_t block_index = 0;
  bool all_zero = true;
};

// Max-normalizes a non-negative map; all-zero maps stay zero and are flagged.
SaliencyMap normalize_saliency(Tensor values, std::size_t target_class);

// Average of the per-step maps at the top ConvLSTM layer, then normalized.
SaliencyMap gradcam_clstm(const EventNet& net, const NetworkTrace& trace, std::size_t target_class,
                          Interpolation mode = Interpolation::kLinear);

struct ExplainOptions {
  Interpolation interpolation = Interpolation::kLinear;
  std::optional<double> threshold;  // dominant-feature threshold mode
};

struct Explanation {
  Prediction prediction;
  SaliencyMap saliency;  // for the predicted class
  std::optional<std::size_t> dominant;
  Outcome outcome = Outcome::kTP;
};

Explanation explain_sample(const EventNet& net, const Sample& sample,
                           const ExplainOptions& options = {});

// Row with the largest saliency sum; ties go to the lower row. With a
// threshold only cells >= threshold count. None for an all-zero map.
std::optional<std::size_t> dominant_feature(const SaliencyMap& saliency,
                                            std::optional<double> threshold = std::nullopt);

struct UtilizationReport {
  std::array<std::array<long long, kFeatureRows>, 4> counts{};  // [outcome][feature]
  std::array<long long, 4> totals{};                            // samples with a dominant feature
  std::array<long long, 4> all_zero{};                          // excluded samples

  double percent(Outcome outcome, std::size_t feature) const;
  std::string csv() const;
};

UtilizationReport utilization_report(std::span<const Explanation> explanations);
UtilizationReport utilization_report(const EventNet& net, std::span<const Sample> samples,
                                     const ExplainOptions& options = {});

// Two panels side by side, one white column apart: the kinodynamic image on
// the left, the saliency s as (s, 0, 0) on the right.
Image render_overlay(const Image& image, const SaliencyMap& saliency);
std::string overlay_filename(const std::string& trial_id, std::size_t block_index,
                             const std::string& extension = ".ppm");

}  // namespace kdi
