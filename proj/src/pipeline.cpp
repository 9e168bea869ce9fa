#include "cofib/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cofib/clustering.hpp"
#include "cofib/collab.hpp"
#include "cofib/dictionary.hpp"
#include "cofib/patches.hpp"
#include "cofib/rng.hpp"

namespace cofib {

namespace {

// Dictionary for a cluster too small for K-SVD: the (deduplicated) member
// patches themselves as atoms, padded with random unit atoms so that M > R.
Dictionary tiny_cluster_dictionary(const Eigen::MatrixXd& members, std::uint64_t seed) {
  const Eigen::Index R = members.rows();
  const int target = static_cast<int>(R) + 1;
  Rng rng(seed);
  Eigen::MatrixXd atoms(R, target);
  int chosen = 0;
  for (Eigen::Index i = 0; i < members.cols() && chosen < target; ++i) {
    const double norm = members.col(i).norm();
    if (norm < 1e-12) continue;
    Eigen::VectorXd a = members.col(i) / norm;
    bool dup = false;
    for (int j = 0; j < chosen && !dup; ++j) dup = std::abs(a.dot(atoms.col(j))) > 1.0 - 1e-9;
    if (!dup) atoms.col(chosen++) = a;
  }
  while (chosen < target) {
    Eigen::VectorXd a(R);
    for (Eigen::Index i = 0; i < R; ++i) a[i] = rng.normal();
    const double norm = a.norm();
    if (norm < 1e-12) continue;
    a /= norm;
    bool dup = false;
    for (int j = 0; j < chosen && !dup; ++j) dup = std::abs(a.dot(atoms.col(j))) > 1.0 - 1e-9;
    if (!dup) atoms.col(chosen++) = a;
  }
  return Dictionary{std::move(atoms)};
}

Dictionary train_cluster_dictionary(const Eigen::MatrixXd& members, const DenoiseConfig& cfg,
                                    std::uint64_t seed) {
  const int R = static_cast<int>(members.rows());
  const int n_members = static_cast<int>(members.cols());
  if (n_members < R + 2) return tiny_cluster_dictionary(members, seed);

  const int atoms = std::min(cfg.dict_atoms, n_members);
  const int cap = std::min(n_members, std::max(cfg.train_sample_cap, atoms));
  if (cap >= n_members) return ksvd_train(members, atoms, cfg.ksvd_sparsity, cfg.ksvd_iters, seed);

  // seeded subsample without replacement
  Rng rng(derive_seed(seed, 0x5a5a));
  std::vector<int> order(static_cast<std::size_t>(n_members));
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < cap; ++i)
    std::swap(order[i], order[i + static_cast<int>(rng.uniform_int(order.size() - i))]);
  Eigen::MatrixXd sample(members.rows(), cap);
  for (int i = 0; i < cap; ++i) sample.col(i) = members.col(order[i]);
  return ksvd_train(sample, atoms, cfg.ksvd_sparsity, cfg.ksvd_iters, seed);
}

}  // namespace

double estimate_sigma(const Image& noisy) {
  if (noisy.width < 2 || noisy.height < 2)
    throw std::invalid_argument("estimate_sigma: image too small");
  std::vector<double> highpass;
  highpass.reserve(static_cast<std::size_t>(noisy.width - 1) * (noisy.height - 1));
  for (int r = 0; r + 1 < noisy.height; ++r) {
    for (int c = 0; c + 1 < noisy.width; ++c) {
      const double h =
          (noisy.at(r, c) - noisy.at(r, c + 1) - noisy.at(r + 1, c) + noisy.at(r + 1, c + 1)) / 2.0;
      highpass.push_back(std::abs(h));
    }
  }
  const std::size_t n = highpass.size();
  auto mid = highpass.begin() + n / 2;
  std::nth_element(highpass.begin(), mid, highpass.end());
  double med = *mid;
  if (n % 2 == 0) {
    const double lo = *std::max_element(highpass.begin(), mid);
    med = (lo + med) / 2.0;
  }
  return med / 0.6745;
}

DenoiseReport denoise_image(const Image& noisy, const DenoiseConfig& cfg) {
  cfg.validate();
  if (noisy.width < cfg.patch_n || noisy.height < cfg.patch_n)
    throw std::invalid_argument("denoise_image: image smaller than one patch");
  const auto t0 = std::chrono::steady_clock::now();

  const double sigma = cfg.noise_sigma ? *cfg.noise_sigma : estimate_sigma(noisy);

  // Step 1: per-pixel patches, max-abs normalized
  PatchSet patches = extract_patches(noisy, cfg.patch_n);
  const std::size_t n_patches = patches.size();

  // Step 2: structure clustering of the normalized vectors
  const int k = std::min<int>(cfg.clusters_k, static_cast<int>(n_patches));
  const ClusterModel clusters =
      kmeans(patches.vectors, k, derive_seed(cfg.seed, 0xC0FFEE));

  std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
  for (std::size_t p = 0; p < n_patches; ++p)
    members[clusters.assignments[p]].push_back(static_cast<int>(p));

  // Steps 3-4 per cluster: K-SVD dictionary, collaborative sparse coding;
  // denoised patch estimates land in per-patch slots
  Eigen::MatrixXd denoised(patches.patch_dim(), static_cast<Eigen::Index>(n_patches));
  for (int c = 0; c < k; ++c) {
    const auto& idx = members[c];
    Eigen::MatrixXd cluster_vectors(patches.patch_dim(), static_cast<Eigen::Index>(idx.size()));
    std::vector<double> noise_vars(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      cluster_vectors.col(static_cast<Eigen::Index>(i)) = patches.vectors.col(idx[i]);
      // normalization divides the noise too
      const double scaled = sigma / patches.scales[idx[i]];
      noise_vars[i] = scaled * scaled;
    }
    const Dictionary dict =
        train_cluster_dictionary(cluster_vectors, cfg, derive_seed(cfg.seed, 0xD1C7 + c));
    const std::vector<SparseSolution> solutions =
        denoise_cluster(cluster_vectors, dict, noise_vars, cfg);

    // Step 5a: back to the spatial patch domain, undoing the normalization
    for (std::size_t i = 0; i < idx.size(); ++i) {
      denoised.col(idx[i]) =
          denormalize(dict.atoms * solutions[i].coeffs, patches.scales[idx[i]]);
    }
  }

  // Step 5b: overlap-averaged reconstruction
  PatchSet reconstructed = std::move(patches);
  reconstructed.vectors = std::move(denoised);
  Image out = aggregate(reconstructed, noisy.height, noisy.width);
  out.range_max = noisy.range_max;

  DenoiseReport report;
  report.denoised = std::move(out);
  report.per_cluster_sizes.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) report.per_cluster_sizes[c] = static_cast<int>(members[c].size());
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.config_echo = cfg;
  return report;
}

}  // namespace cofib
