#include "cofib/patches.hpp"

#include <cmath>
#include <stdexcept>

#include "cofib/parallel.hpp"

namespace cofib {

namespace {

inline int reflect_index(int i, int size) {
  if (i < 0) return -i;
  if (i >= size) return 2 * size - 2 - i;
  return i;
}

}  // namespace

Image pad_reflect(const Image& image, int pad) {
  if (pad < 0) throw std::invalid_argument("pad_reflect: negative pad");
  if (pad >= std::min(image.width, image.height))
    throw std::invalid_argument("pad_reflect: pad must be smaller than both image sides");
  if (pad == 0) return image;

  Image out(image.width + 2 * pad, image.height + 2 * pad, 0.0, image.range_max);
  for (int r = 0; r < out.height; ++r) {
    const int sr = reflect_index(r - pad, image.height);
    for (int c = 0; c < out.width; ++c) {
      out.at(r, c) = image.at(sr, reflect_index(c - pad, image.width));
    }
  }
  return out;
}

PatchSet extract_patches(const Image& image, int n) {
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("extract_patches: n must be odd and >= 3");
  if (n > std::min(image.width, image.height))
    throw std::invalid_argument("extract_patches: n exceeds image side");

  const int pad = (n - 1) / 2;
  const Image padded = pad_reflect(image, pad);
  const int w = image.width, h = image.height;
  const int R = n * n;

  PatchSet set;
  set.patch_n = n;
  set.vectors.resize(R, static_cast<Eigen::Index>(w) * h);
  set.centers.resize(static_cast<std::size_t>(w) * h);
  set.scales.resize(static_cast<std::size_t>(w) * h);

  parallel_for(static_cast<std::size_t>(h), 8, [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t p = r * w + c;
        auto col = set.vectors.col(static_cast<Eigen::Index>(p));
        double maxabs = 0.0;
        for (int cc = 0; cc < n; ++cc) {
          for (int rr = 0; rr < n; ++rr) {
            const double v = padded.at(static_cast<int>(r) + rr, c + cc);
            col[cc * n + rr] = v;
            maxabs = std::max(maxabs, std::abs(v));
          }
        }
        if (maxabs == 0.0) {
          set.scales[p] = 1.0;  // flat-zero patch: keep zeros, denormalize is a no-op
        } else {
          col /= maxabs;
          set.scales[p] = maxabs;
        }
        set.centers[p] = {static_cast<int>(r), c};
      }
    }
  });
  return set;
}

Eigen::VectorXd denormalize(const Eigen::VectorXd& vector, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("denormalize: scale must be positive");
  return vector * scale;
}

Image aggregate(const PatchSet& patches, int out_height, int out_width) {
  const int n = patches.patch_n;
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("aggregate: invalid patch size");
  if (patches.vectors.cols() != static_cast<Eigen::Index>(patches.centers.size()))
    throw std::invalid_argument("aggregate: vectors/centers size mismatch");
  const int pad = (n - 1) / 2;

  Image out(out_width, out_height, 0.0);
  std::vector<std::uint32_t> counts(out.pixel_count(), 0);

  for (std::size_t p = 0; p < patches.centers.size(); ++p) {
    const auto [r, c] = patches.centers[p];
    if (r < 0 || r >= out_height || c < 0 || c >= out_width)
      throw std::invalid_argument("aggregate: patch center outside output dimensions");
    const auto col = patches.vectors.col(static_cast<Eigen::Index>(p));
    for (int cc = 0; cc < n; ++cc) {
      const int ct = c + cc - pad;
      if (ct < 0 || ct >= out_width) continue;
      for (int rr = 0; rr < n; ++rr) {
        const int rt = r + rr - pad;
        if (rt < 0 || rt >= out_height) continue;
        out.at(rt, ct) += col[cc * n + rr];
        ++counts[static_cast<std::size_t>(rt) * out_width + ct];
      }
    }
  }
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    if (counts[i] > 0) out.pixels[i] /= static_cast<double>(counts[i]);
  }
  return out;
}

}  // namespace cofib
