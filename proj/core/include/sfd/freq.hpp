#pragma once

// Orthonormal 2D DCT-II / DCT-III pair on square planes and the band split
// used to build original/low/high reconstructions for the frequency path.
//
//   F(k,l) = C(k) C(l) sum_{m,n} f(m,n) cos((2m+1)k pi / 2N) cos((2n+1)l pi / 2N)
//   C(0) = sqrt(1/N), C(k>0) = sqrt(2/N)
//
// All functions are pure and thread-safe.

#include <Eigen/Core>
#include <cstddef>
#include <vector>

namespace sfd::freq {

/// N x N pixel plane with finite entries.
class ImagePlane {
 public:
  ImagePlane() = default;
  /// Throws InvalidInput when `values` is not square or holds NaN/Inf.
  explicit ImagePlane(Eigen::MatrixXd values);

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

 private:
  Eigen::MatrixXd values_;
};

/// N x N DCT coefficients, (k, l) = (row, column) frequency index.
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(Eigen::MatrixXd coeffs);

  std::size_t size() const noexcept { return static_cast<std::size_t>(coeffs_.rows()); }
  const Eigen::MatrixXd& coeffs() const noexcept { return coeffs_; }

 private:
  Eigen::MatrixXd coeffs_;
};

enum class Band { low, high };

/// Anti-diagonal mask: the low band is k + l <= cutoff, the high band the rest.
struct FrequencyMask {
  std::size_t cutoff = 0;
  Band band = Band::low;

  bool contains(std::size_t k, std::size_t l) const noexcept {
    return band == Band::low ? k + l <= cutoff : k + l > cutoff;
  }
};

/// C(k) for an N-point transform.
double dct_scale(std::size_t k, std::size_t n);

/// Row k of the N-point DCT-II matrix evaluated at sample m: C(k) cos((2m+1) k pi / 2N).
double dct_basis(std::size_t k, std::size_t m, std::size_t n);

/// N x N orthonormal DCT-II matrix D with D(k, m) = dct_basis(k, m, N).
Eigen::MatrixXd dct_matrix(std::size_t n);

/// Separable fast path: D f D^T.
Spectrum dct2_forward(const ImagePlane& plane);
/// Separable inverse: D^T F D.
ImagePlane dct2_inverse(const Spectrum& spectrum);

/// Reference implementations by direct double summation, O(N^4).
Spectrum dct2_forward_direct(const ImagePlane& plane);
ImagePlane dct2_inverse_direct(const Spectrum& spectrum);

struct SpectrumSplit {
  Spectrum low;
  Spectrum high;
};

/// Throws InvalidInput unless 0 <= cutoff <= 2(N-1).
SpectrumSplit split_spectrum(const Spectrum& spectrum, std::size_t cutoff);

struct ReconstructionTriplet {
  ImagePlane original;
  ImagePlane low;
  ImagePlane high;
};

ReconstructionTriplet reconstruct_triplet(const ImagePlane& plane, std::size_t cutoff);

/// Default band cutoff N/4.
std::size_t default_cutoff(std::size_t n) noexcept;

/// Applies reconstruct_triplet to every channel of a [C, N, N] image stored
/// row-major and stacks the results as [original x C, low x C, high x C].
std::vector<double> frequency_triplet_channels(const std::vector<double>& image, std::size_t channels,
                                               std::size_t n, std::size_t cutoff);

}  // namespace sfd::freq
