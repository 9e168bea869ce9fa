#pragma once

#include <vector>

#include "cofib/config.hpp"
#include "cofib/image.hpp"

namespace cofib {

struct DenoiseReport {
  Image denoised;
  std::vector<int> per_cluster_sizes;
  double wall_time_s = 0.0;
  DenoiseConfig config_echo;
};

// End-to-end denoiser: patch extraction -> k-means clustering -> per-cluster
// K-SVD dictionaries -> collaborative Bayesian sparse coding -> overlap
// aggregation. Deterministic for a fixed (image, config, seed).
DenoiseReport denoise_image(const Image& noisy, const DenoiseConfig& cfg);

// Robust noise-level estimate: median absolute deviation of the 2x2 diagonal
// high-pass residual, scaled by 1/0.6745.
double estimate_sigma(const Image& noisy);

}  // namespace cofib
