#include "sfd/harness/datasets.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "sfd/error.hpp"
#include "sfd/harness/preprocess.hpp"

namespace sfd::harness {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kCifarSide = 32;
constexpr std::size_t kCifarPixels = 3 * kCifarSide * kCifarSide;

struct Grating {
  double fx, fy;                // cycles per image
  std::vector<double> colour;   // per-channel amplitude
};

std::vector<std::uint8_t> read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError(file.string(), "cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct RawImage {
  std::size_t channels = 0, height = 0, width = 0;
  std::vector<double> planar;  // [C, H, W] in [0, 1]
};

// Reads binary P5/P6 with maxval < 256.
RawImage read_pnm(const fs::path& file) {
  const auto bytes = read_file(file);
  std::size_t pos = 0;
  auto token = [&]() {
    std::string t;
    while (pos < bytes.size()) {
      const char c = static_cast<char>(bytes[pos]);
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        ++pos;
      } else {
        t.push_back(c);
        ++pos;
      }
    }
    return t;
  };
  const auto magic = token();
  if (magic != "P5" && magic != "P6") throw IoError(file.string(), "not a binary PGM/PPM file");
  RawImage img;
  try {
    img.width = std::stoul(token());
    img.height = std::stoul(token());
    const auto maxval = std::stoul(token());
    if (maxval == 0 || maxval > 255) throw IoError(file.string(), "unsupported maxval");
    img.channels = magic == "P6" ? 3 : 1;
    ++pos;  // single whitespace before the raster
    const std::size_t n = img.width * img.height;
    if (n == 0 || bytes.size() < pos + n * img.channels) throw IoError(file.string(), "truncated raster");
    img.planar.resize(n * img.channels);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t c = 0; c < img.channels; ++c)
        img.planar[c * n + p] = bytes[pos + p * img.channels + c] / static_cast<double>(maxval);
  } catch (const std::logic_error&) {
    throw IoError(file.string(), "malformed header");
  }
  return img;
}

RawImage read_png(const fs::path& file) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, file.c_str())) throw IoError(file.string(), image.message);
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError(file.string(), image.message);
  }
  RawImage img{3, image.height, image.width, {}};
  const std::size_t n = img.height * img.width;
  img.planar.resize(3 * n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t c = 0; c < 3; ++c) img.planar[c * n + p] = buffer[p * 3 + c] / 255.0;
  return img;
}

std::vector<double> convert_channels(const RawImage& img, std::size_t channels) {
  const std::size_t n = img.height * img.width;
  if (img.channels == channels) return img.planar;
  std::vector<double> out(channels * n);
  if (channels == 1) {
    for (std::size_t p = 0; p < n; ++p)
      out[p] = 0.299 * img.planar[p] + 0.587 * img.planar[n + p] + 0.114 * img.planar[2 * n + p];
  } else {
    for (std::size_t c = 0; c < 3; ++c) std::copy_n(img.planar.begin(), n, out.begin() + static_cast<std::ptrdiff_t>(c * n));
  }
  return out;
}

}  // namespace

Dataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.classes == 0 || spec.per_class == 0 || spec.size < 4) throw ConfigError("synthetic: empty or too small spec");
  if (spec.channels != 1 && spec.channels != 3) throw ConfigError("synthetic: channels must be 1 or 3");
  if (spec.noise < 0.0) throw ConfigError("synthetic: noise must be non-negative");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double max_freq = static_cast<double>(spec.size) / 4.0;

  std::vector<std::vector<Grating>> classes(spec.classes);
  for (auto& gratings : classes) {
    for (int g = 0; g < 2; ++g) {
      Grating gr;
      const double radius = 1.0 + unit(rng) * (max_freq - 1.0);
      const double angle = unit(rng) * std::numbers::pi;
      gr.fx = radius * std::cos(angle);
      gr.fy = radius * std::sin(angle);
      for (std::size_t c = 0; c < spec.channels; ++c) gr.colour.push_back(0.1 + 0.2 * unit(rng));
      gratings.push_back(std::move(gr));
    }
  }

  Dataset ds;
  ds.name = "synthetic";
  ds.channels = spec.channels;
  ds.height = ds.width = spec.size;
  const std::size_t n = spec.size;
  std::vector<double> image(spec.channels * n * n);
  for (std::size_t cls = 0; cls < spec.classes; ++cls) {
    for (std::size_t s = 0; s < spec.per_class; ++s) {
      const double brightness = 0.5 + 0.1 * (unit(rng) - 0.5);
      std::fill(image.begin(), image.end(), brightness);
      for (const auto& gr : classes[cls]) {
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        const double jitter = 0.75 + 0.5 * unit(rng);
        for (std::size_t y = 0; y < n; ++y)
          for (std::size_t x = 0; x < n; ++x) {
            const double wave = std::cos(2.0 * std::numbers::pi * (gr.fx * static_cast<double>(x) + gr.fy * static_cast<double>(y)) /
                                             static_cast<double>(n) + phase);
            for (std::size_t c = 0; c < spec.channels; ++c) image[(c * n + y) * n + x] += jitter * gr.colour[c] * wave;
          }
      }
      for (auto& v : image) v = std::clamp(v + spec.noise * gauss(rng), 0.0, 1.0);
      ds.append(image, static_cast<int>(cls));
    }
  }
  return ds;
}

Dataset load_cifar_binary(const fs::path& file, std::size_t label_bytes, Split split) {
  if (label_bytes != 1 && label_bytes != 2) throw ConfigError("CIFAR label bytes must be 1 or 2");
  const auto bytes = read_file(file);
  const std::size_t record = label_bytes + kCifarPixels;
  if (bytes.empty() || bytes.size() % record != 0) {
    throw IoError(file.string(), "size " + std::to_string(bytes.size()) + " is not a multiple of the " +
                                     std::to_string(record) + "-byte record");
  }
  Dataset ds;
  ds.name = file.stem().string();
  ds.channels = 3;
  ds.height = ds.width = kCifarSide;
  const std::size_t count = bytes.size() / record;
  ds.pixels.reserve(count * kCifarPixels);
  std::vector<double> image(kCifarPixels);
  for (std::size_t r = 0; r < count; ++r) {
    const std::uint8_t* rec = bytes.data() + r * record;
    for (std::size_t i = 0; i < kCifarPixels; ++i) image[i] = rec[label_bytes + i] / 255.0;
    ds.append(image, rec[label_bytes - 1]);
    ds.canonical_split.push_back(split);
  }
  return ds;
}

Dataset load_cifar_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir.string(), "not a directory");
  std::vector<std::pair<fs::path, Split>> files;
  std::size_t label_bytes = 1;
  if (fs::exists(dir / "train.bin")) {
    label_bytes = 2;
    files = {{dir / "train.bin", Split::train}, {dir / "test.bin", Split::test}};
  } else {
    for (int i = 1; i <= 5; ++i) {
      const auto f = dir / ("data_batch_" + std::to_string(i) + ".bin");
      if (fs::exists(f)) files.emplace_back(f, Split::train);
    }
    files.emplace_back(dir / "test_batch.bin", Split::test);
  }
  Dataset out;
  for (const auto& [file, split] : files) {
    if (!fs::exists(file)) throw IoError(file.string(), "missing CIFAR file");
    auto part = load_cifar_binary(file, label_bytes, split);
    if (out.labels.empty()) {
      out = std::move(part);
      out.name = dir.filename().string();
      continue;
    }
    out.pixels.insert(out.pixels.end(), part.pixels.begin(), part.pixels.end());
    out.labels.insert(out.labels.end(), part.labels.begin(), part.labels.end());
    out.canonical_split.insert(out.canonical_split.end(), part.canonical_split.begin(), part.canonical_split.end());
  }
  return out;
}

Dataset load_image_directory(const fs::path& root, std::size_t channels, std::size_t resolution) {
  if (channels != 1 && channels != 3) throw ConfigError("image directory channels must be 1 or 3");
  if (resolution == 0) throw ConfigError("resolution must be positive");
  if (!fs::is_directory(root)) throw IoError(root.string(), "not a directory");
  std::set<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) class_dirs.insert(entry.path());
  Dataset ds;
  ds.name = root.filename().string();
  ds.channels = channels;
  ds.height = ds.width = resolution;
  int label = 0;
  for (const auto& dir : class_dirs) {
    std::set<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      auto ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (entry.is_regular_file() && (ext == ".png" || ext == ".ppm" || ext == ".pgm")) files.insert(entry.path());
    }
    if (files.empty()) continue;
    for (const auto& file : files) {
      const auto raw = file.extension() == ".png" || file.extension() == ".PNG" ? read_png(file) : read_pnm(file);
      ds.append(resize_bilinear(convert_channels(raw, channels), channels, raw.height, raw.width, resolution), label);
    }
    ++label;
  }
  if (ds.labels.empty()) throw IoError(root.string(), "no images found");
  return ds;
}

void write_pnm(const fs::path& file, std::span<const double> image, std::size_t channels, std::size_t height,
               std::size_t width) {
  if (channels != 1 && channels != 3) throw InvalidInput("write_pnm: channels must be 1 or 3");
  if (image.size() != channels * height * width) throw InvalidInput("write_pnm: image size mismatch");
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError(file.string(), "cannot open for writing");
  out << (channels == 3 ? "P6" : "P5") << '\n' << width << ' ' << height << "\n255\n";
  const std::size_t n = height * width;
  std::vector<char> raster(n * channels);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t c = 0; c < channels; ++c)
      raster[p * channels + c] = static_cast<char>(std::lround(std::clamp(image[c * n + p], 0.0, 1.0) * 255.0));
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) throw IoError(file.string(), "write failed");
}

void write_image_directory(const Dataset& dataset, const fs::path& root) {
  const char* ext = dataset.channels == 3 ? ".ppm" : ".pgm";
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError(root.string(), ec.message());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::ostringstream label;
    label.width(4);
    label.fill('0');
    label << dataset.labels[i];
    const auto dir = root / label.str();
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir.string(), ec.message());
    write_pnm(dir / (std::to_string(i) + ext), dataset.image(i), dataset.channels, dataset.height, dataset.width);
  }
}

}  // namespace sfd::harness
