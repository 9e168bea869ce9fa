#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "cofib/image.hpp"

namespace cofib {

// Overlapping per-pixel patches of an image. Column p of `vectors` is the
// column-major vectorization of the n-by-n window centered at centers[p],
// divided by its max absolute value (scales[p]); an all-zero patch is kept
// as zeros with scale 1.
struct PatchSet {
  int patch_n = 0;                          // n, odd
  Eigen::MatrixXd vectors;                  // R x N, R = n*n
  std::vector<std::pair<int, int>> centers; // (row, col) in the unpadded image
  std::vector<double> scales;

  int patch_dim() const { return patch_n * patch_n; }
  std::size_t size() const { return scales.size(); }
};

// Mirror padding without repeating the edge pixel:
// [a,b,c] with pad 1 -> [b,a,b,c,b].
Image pad_reflect(const Image& image, int pad);

// One patch per pixel via (n-1)/2 reflective padding; each patch normalized
// by its max absolute value.
PatchSet extract_patches(const Image& image, int n);

// Inverse of the extraction normalization.
Eigen::VectorXd denormalize(const Eigen::VectorXd& vector, double scale);

// Overlap-averaged reconstruction. `patches.vectors` must hold denormalized
// patch contents; contributions falling into the padding are discarded.
Image aggregate(const PatchSet& patches, int out_height, int out_width);

}  // namespace cofib
