#include "sfd/harness/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "sfd/error.hpp"
#include "sfd/freq.hpp"

namespace sfd::harness {

std::vector<double> resize_bilinear(std::span<const double> image, std::size_t channels, std::size_t height,
                                    std::size_t width, std::size_t resolution) {
  if (image.size() != channels * height * width) throw InvalidInput("resize_bilinear: image size mismatch");
  if (height == resolution && width == resolution) return {image.begin(), image.end()};
  std::vector<double> out(channels * resolution * resolution);
  const double sy = static_cast<double>(height) / static_cast<double>(resolution);
  const double sx = static_cast<double>(width) / static_cast<double>(resolution);
  for (std::size_t c = 0; c < channels; ++c) {
    const double* src = image.data() + c * height * width;
    for (std::size_t y = 0; y < resolution; ++y) {
      const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, static_cast<double>(height - 1));
      const auto y0 = static_cast<std::size_t>(fy);
      const std::size_t y1 = std::min(y0 + 1, height - 1);
      const double wy = fy - static_cast<double>(y0);
      for (std::size_t x = 0; x < resolution; ++x) {
        const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, static_cast<double>(width - 1));
        const auto x0 = static_cast<std::size_t>(fx);
        const std::size_t x1 = std::min(x0 + 1, width - 1);
        const double wx = fx - static_cast<double>(x0);
        const double top = src[y0 * width + x0] * (1 - wx) + src[y0 * width + x1] * wx;
        const double bottom = src[y1 * width + x0] * (1 - wx) + src[y1 * width + x1] * wx;
        out[(c * resolution + y) * resolution + x] = top * (1 - wy) + bottom * wy;
      }
    }
  }
  return out;
}

std::vector<double> horizontal_flip(std::span<const double> image, std::size_t channels, std::size_t resolution) {
  if (image.size() != channels * resolution * resolution) throw InvalidInput("horizontal_flip: image size mismatch");
  std::vector<double> out(image.size());
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < resolution; ++y)
      for (std::size_t x = 0; x < resolution; ++x)
        out[(c * resolution + y) * resolution + x] = image[(c * resolution + y) * resolution + (resolution - 1 - x)];
  return out;
}

std::vector<double> padded_crop(std::span<const double> image, std::size_t channels, std::size_t resolution,
                                std::size_t padding, std::size_t top, std::size_t left) {
  if (image.size() != channels * resolution * resolution) throw InvalidInput("padded_crop: image size mismatch");
  if (top > 2 * padding || left > 2 * padding) throw InvalidInput("padded_crop: offset outside the padded image");
  std::vector<double> out(image.size(), 0.0);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < resolution; ++y) {
      const auto sy = static_cast<std::ptrdiff_t>(y + top) - static_cast<std::ptrdiff_t>(padding);
      if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(resolution)) continue;
      for (std::size_t x = 0; x < resolution; ++x) {
        const auto sx = static_cast<std::ptrdiff_t>(x + left) - static_cast<std::ptrdiff_t>(padding);
        if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(resolution)) continue;
        out[(c * resolution + y) * resolution + x] = image[(c * resolution + static_cast<std::size_t>(sy)) * resolution + static_cast<std::size_t>(sx)];
      }
    }
  return out;
}

Tensor preprocess_eval(const TaskData& data, std::span<const std::size_t> indices, std::size_t resolution) {
  const std::size_t c = data.channels, plane = resolution * resolution;
  std::vector<double> out(indices.size() * c * plane);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto img = resize_bilinear(data.image(indices[i]), c, data.height, data.width, resolution);
    std::copy(img.begin(), img.end(), out.begin() + static_cast<std::ptrdiff_t>(i * c * plane));
  }
  return Tensor::from({indices.size(), c, resolution, resolution}, std::move(out));
}

Tensor preprocess_train(const TaskData& data, std::span<const std::size_t> indices, std::size_t resolution,
                        const Augmentation& augmentation, Rng& rng) {
  const std::size_t c = data.channels, plane = resolution * resolution;
  std::vector<double> out(indices.size() * c * plane);
  std::uniform_int_distribution<std::size_t> offset(0, 2 * augmentation.crop_padding);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto img = resize_bilinear(data.image(indices[i]), c, data.height, data.width, resolution);
    if (augmentation.crop_padding > 0) {
      const std::size_t top = offset(rng), left = offset(rng);
      img = padded_crop(img, c, resolution, augmentation.crop_padding, top, left);
    }
    if (augmentation.horizontal_flip && coin(rng)) img = horizontal_flip(img, c, resolution);
    std::copy(img.begin(), img.end(), out.begin() + static_cast<std::ptrdiff_t>(i * c * plane));
  }
  return Tensor::from({indices.size(), c, resolution, resolution}, std::move(out));
}

Tensor frequency_triplets(const Tensor& images, std::size_t cutoff) {
  if (images.rank() != 4 || images.dim(2) != images.dim(3)) {
    throw InvalidInput("frequency_triplets expects square [B, C, N, N] images, got " + shape_string(images.shape()));
  }
  const std::size_t b = images.dim(0), c = images.dim(1), n = images.dim(2);
  const std::size_t image_size = c * n * n;
  std::vector<double> out;
  out.reserve(b * 3 * image_size);
  auto data = images.data();
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<double> img(data.begin() + static_cast<std::ptrdiff_t>(i * image_size),
                            data.begin() + static_cast<std::ptrdiff_t>((i + 1) * image_size));
    auto stacked = freq::frequency_triplet_channels(img, c, n, cutoff);
    out.insert(out.end(), stacked.begin(), stacked.end());
  }
  return Tensor::from({b, 3 * c, n, n}, std::move(out));
}

}  // namespace sfd::harness
