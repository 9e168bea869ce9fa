#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cofib {

// 2-D grayscale image, row-major, top-left origin. Pixels are real-valued;
// intermediate results (e.g. noisy images) may exceed [0, range_max] and are
// only clamped when written to disk.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;
  double range_max = 255.0;

  Image() = default;
  Image(int w, int h, double fill = 0.0, double range = 255.0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill), range_max(range) {}

  double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
  double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
  std::size_t pixel_count() const { return pixels.size(); }
};

// Parameters of one additive white Gaussian noise realization.
struct NoiseSpec {
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  double sigma = 0.0;  // noise standard deviation, intensity units
};

// Reads a PGM file (P2 ASCII or P5 binary, maxval <= 65535).
Image load_pgm(const std::string& path);

// Writes P5 (binary=true) or P2 (ASCII). Pixels are clamped to
// [0, range_max] and rounded; written maxval is round(range_max) in [1,255].
void save_pgm(const Image& image, const std::string& path, bool binary = true);

// Adds white Gaussian noise at the given SNR: sigma^2 = mean(clean^2) /
// 10^(snr_db/10). The noisy image is not clamped. Deterministic per seed.
std::pair<Image, NoiseSpec> add_awgn(const Image& clean, double snr_db, std::uint64_t seed);

// 10*log10(range_max^2 / MSE); +infinity when the images are identical.
double psnr(const Image& reference, const Image& test);

// Mean structural similarity, 11x11 Gaussian window (sd 1.5),
// C1=(0.01*range_max)^2, C2=(0.03*range_max)^2.
double ssim(const Image& reference, const Image& test);

double mean_power(const Image& image);

}  // namespace cofib
