#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sfd/harness/data.hpp"
#include "sfd/nn.hpp"
#include "sfd/tensor.hpp"

namespace sfd::harness {

struct Augmentation {
  std::size_t crop_padding = 4;
  bool horizontal_flip = true;
};

/// Bilinear resize of a [C, H, W] image to [C, R, R] (align-corners off).
std::vector<double> resize_bilinear(std::span<const double> image, std::size_t channels, std::size_t height,
                                    std::size_t width, std::size_t resolution);

/// Mirrors every row of a [C, R, R] image. Applying it twice is the identity.
std::vector<double> horizontal_flip(std::span<const double> image, std::size_t channels, std::size_t resolution);

/// Zero-pads by `padding` on each side, then cuts an R x R window at offset (top, left).
std::vector<double> padded_crop(std::span<const double> image, std::size_t channels, std::size_t resolution,
                                std::size_t padding, std::size_t top, std::size_t left);

/// Evaluation-time preprocessing: resize only, deterministic.
Tensor preprocess_eval(const TaskData& data, std::span<const std::size_t> indices, std::size_t resolution);

/// Training-time preprocessing: resize, seeded random crop with padding, random horizontal flip.
Tensor preprocess_train(const TaskData& data, std::span<const std::size_t> indices, std::size_t resolution,
                        const Augmentation& augmentation, Rng& rng);

/// Per-image original/low/high DCT reconstructions stacked on channels: [B, 3C, R, R].
Tensor frequency_triplets(const Tensor& images, std::size_t cutoff);

}  // namespace sfd::harness
