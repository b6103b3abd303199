#include "sfd/freq.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sfd/error.hpp"

namespace sfd::freq {

namespace {

void require_square_finite(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidInput(std::string(what) + " must be a non-empty square matrix, got " + std::to_string(m.rows()) +
                       "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw InvalidInput(std::string(what) + " contains non-finite values");
}

}  // namespace

ImagePlane::ImagePlane(Eigen::MatrixXd values) : values_(std::move(values)) {
  require_square_finite(values_, "image plane");
}

Spectrum::Spectrum(Eigen::MatrixXd coeffs) : coeffs_(std::move(coeffs)) {
  require_square_finite(coeffs_, "spectrum");
}

double dct_scale(std::size_t k, std::size_t n) {
  return k == 0 ? std::sqrt(1.0 / static_cast<double>(n)) : std::sqrt(2.0 / static_cast<double>(n));
}

double dct_basis(std::size_t k, std::size_t m, std::size_t n) {
  const double angle = static_cast<double>((2 * m + 1) * k) * std::numbers::pi / (2.0 * static_cast<double>(n));
  return dct_scale(k, n) * std::cos(angle);
}

Eigen::MatrixXd dct_matrix(std::size_t n) {
  Eigen::MatrixXd d(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t m = 0; m < n; ++m) d(k, m) = dct_basis(k, m, n);
  return d;
}

Spectrum dct2_forward(const ImagePlane& plane) {
  const auto d = dct_matrix(plane.size());
  return Spectrum(d * plane.values() * d.transpose());
}

ImagePlane dct2_inverse(const Spectrum& spectrum) {
  const auto d = dct_matrix(spectrum.size());
  return ImagePlane(d.transpose() * spectrum.coeffs() * d);
}

Spectrum dct2_forward_direct(const ImagePlane& plane) {
  const std::size_t n = plane.size();
  const auto& f = plane.values();
  Eigen::MatrixXd out(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) {
      double s = 0.0;
      for (std::size_t m = 0; m < n; ++m)
        for (std::size_t q = 0; q < n; ++q) {
          const double ck = std::cos(static_cast<double>((2 * m + 1) * k) * std::numbers::pi / (2.0 * n));
          const double cl = std::cos(static_cast<double>((2 * q + 1) * l) * std::numbers::pi / (2.0 * n));
          s += f(m, q) * ck * cl;
        }
      out(k, l) = dct_scale(k, n) * dct_scale(l, n) * s;
    }
  return Spectrum(std::move(out));
}

ImagePlane dct2_inverse_direct(const Spectrum& spectrum) {
  const std::size_t n = spectrum.size();
  const auto& c = spectrum.coeffs();
  Eigen::MatrixXd out(n, n);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t q = 0; q < n; ++q) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) s += c(k, l) * dct_basis(k, m, n) * dct_basis(l, q, n);
      out(m, q) = s;
    }
  return ImagePlane(std::move(out));
}

SpectrumSplit split_spectrum(const Spectrum& spectrum, std::size_t cutoff) {
  const std::size_t n = spectrum.size();
  if (cutoff > 2 * (n - 1)) {
    throw InvalidInput("cutoff " + std::to_string(cutoff) + " outside [0, " + std::to_string(2 * (n - 1)) + "]");
  }
  Eigen::MatrixXd low = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd high = Eigen::MatrixXd::Zero(n, n);
  const FrequencyMask low_mask{cutoff, Band::low};
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) {
      if (low_mask.contains(k, l)) {
        low(k, l) = spectrum.coeffs()(k, l);
      } else {
        high(k, l) = spectrum.coeffs()(k, l);
      }
    }
  return {Spectrum(std::move(low)), Spectrum(std::move(high))};
}

ReconstructionTriplet reconstruct_triplet(const ImagePlane& plane, std::size_t cutoff) {
  const auto spectrum = dct2_forward(plane);
  auto [low, high] = split_spectrum(spectrum, cutoff);
  return {dct2_inverse(spectrum), dct2_inverse(low), dct2_inverse(high)};
}

std::size_t default_cutoff(std::size_t n) noexcept { return n / 4; }

std::vector<double> frequency_triplet_channels(const std::vector<double>& image, std::size_t channels,
                                               std::size_t n, std::size_t cutoff) {
  const std::size_t plane_size = n * n;
  if (image.size() != channels * plane_size) {
    throw InvalidInput("frequency_triplet_channels: image has " + std::to_string(image.size()) +
                       " values, expected " + std::to_string(channels * plane_size));
  }
  std::vector<double> out(3 * channels * plane_size);
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  for (std::size_t c = 0; c < channels; ++c) {
    Eigen::MatrixXd values = Eigen::Map<const RowMat>(image.data() + c * plane_size, n, n);
    const auto triplet = reconstruct_triplet(ImagePlane(std::move(values)), cutoff);
    const ImagePlane* parts[3] = {&triplet.original, &triplet.low, &triplet.high};
    for (std::size_t part = 0; part < 3; ++part) {
      Eigen::Map<RowMat>(out.data() + (part * channels + c) * plane_size, n, n) = parts[part]->values();
    }
  }
  return out;
}

}  // namespace sfd::freq
