#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cofib/config.hpp"
#include "cofib/image.hpp"

namespace cofib {

// One benchmark run of the denoiser on one (image, SNR, seed) point.
struct BenchRecord {
  std::string image_name;
  int width = 0;
  int height = 0;
  double snr_db = 0.0;
  double psnr_noisy = 0.0;
  double psnr_denoised = 0.0;
  double ssim_noisy = 0.0;
  double ssim_denoised = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
};

// The paper-style SNR sweep: for each SNR, noise is synthesized with seed
// seed+index, denoised with sigma passed through, and both noisy and
// denoised metrics recorded. Default sweep is {-5, 0, ..., 35} dB.
std::vector<BenchRecord> run_snr_sweep(const Image& clean, const std::string& image_name,
                                       const std::vector<double>& snrs, const DenoiseConfig& cfg,
                                       std::uint64_t seed);

std::vector<double> default_snr_sweep();

// Resolution sweep at a fixed SNR: the clean image is center-cropped to the
// largest square multiple of each side, box-downsampled, noised, denoised.
std::vector<BenchRecord> run_resolution_sweep(const Image& clean, const std::string& image_name,
                                              const std::vector<int>& sides, double snr_db,
                                              const DenoiseConfig& cfg, std::uint64_t seed);

Image center_crop(const Image& image, int crop_h, int crop_w);
Image box_downsample(const Image& image, int factor);
// center-crop-then-box-downsample to side x side
Image resize_to_side(const Image& image, int side);

// CSV with the fixed header image,width,height,snr_db,psnr_noisy,
// psnr_denoised,ssim_noisy,ssim_denoised,wall_time_s,seed; reals at 6
// significant digits, infinities as "inf".
void emit_csv(const std::vector<BenchRecord>& records, const std::string& path);
std::vector<BenchRecord> parse_csv(const std::string& path);

// Standalone SVG 1.1 line chart of psnr_denoised against snr_db.
void emit_svg_chart(const std::vector<BenchRecord>& records, const std::string& path);

// CSV real formatting (6 significant digits, "inf" sentinel); exposed for
// the summary output.
std::string format_real(double value);

}  // namespace cofib
