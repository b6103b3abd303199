#pragma once

// Dataset sources: CIFAR binary records, a directory of images grouped by
// class folder, and a seeded synthetic texture generator.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "sfd/harness/data.hpp"

namespace sfd::harness {

struct SyntheticSpec {
  std::size_t classes = 10;
  std::size_t per_class = 50;
  std::size_t size = 32;
  std::size_t channels = 3;
  std::uint64_t seed = 7;
  double noise = 0.08;  // std of additive pixel noise
};

/// Each class owns a few cosine gratings with a class colour profile; samples
/// draw random phases, amplitude jitter and pixel noise. Labels are 0..classes-1
/// in generation order.
Dataset make_synthetic(const SyntheticSpec& spec);

/// CIFAR binary layout: per record `label_bytes` label bytes (1 for CIFAR-10,
/// 2 coarse+fine for CIFAR-100, the last one is used) then 1024 R, 1024 G,
/// 1024 B bytes in row-major order.
Dataset load_cifar_binary(const std::filesystem::path& file, std::size_t label_bytes, Split split);

/// CIFAR directory holding data_batch_*.bin / test_batch.bin (CIFAR-10) or
/// train.bin / test.bin (CIFAR-100); records keep their canonical split.
Dataset load_cifar_directory(const std::filesystem::path& dir);

/// root/<class folder>/<image>.{png,ppm,pgm}. Class ids follow sorted folder
/// names. Every image is converted to `channels` (1 or 3) and resized to
/// resolution x resolution.
Dataset load_image_directory(const std::filesystem::path& root, std::size_t channels, std::size_t resolution);

/// Writes one binary PPM (3 channels) or PGM (1 channel) image.
void write_pnm(const std::filesystem::path& file, std::span<const double> image, std::size_t channels,
               std::size_t height, std::size_t width);

/// Writes `dataset` as root/<label>/<index>.{ppm,pgm}, readable by load_image_directory.
void write_image_directory(const Dataset& dataset, const std::filesystem::path& root);

}  // namespace sfd::harness
