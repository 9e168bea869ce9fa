#include "cofib/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cofib/rng.hpp"

namespace cofib {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      break;
    }
  }
  if (tok.empty()) return tok;
  while ((c = in.get()) != EOF && !std::isspace(c) && c != '#') tok.push_back(static_cast<char>(c));
  if (c == '#') {
    while ((c = in.get()) != EOF && c != '\n') {
    }
  }
  return tok;
}

long parse_header_int(std::istream& in, const char* what) {
  const std::string tok = next_token(in);
  if (tok.empty()) throw std::runtime_error(std::string("pgm: malformed header: missing ") + what);
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("pgm: malformed header: bad ") + what + " '" + tok + "'");
  }
  if (pos != tok.size() || v < 0)
    throw std::runtime_error(std::string("pgm: malformed header: bad ") + what + " '" + tok + "'");
  return v;
}

void validate_dims(int w, int h) {
  if (w <= 0 || h <= 0) throw std::runtime_error("pgm: malformed header: non-positive dimensions");
}

}  // namespace

Image load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pgm: cannot open '" + path + "'");

  const std::string magic = next_token(in);
  if (magic != "P2" && magic != "P5")
    throw std::runtime_error("pgm: malformed header: unsupported magic '" + magic + "'");

  const long w = parse_header_int(in, "width");
  const long h = parse_header_int(in, "height");
  const long maxval = parse_header_int(in, "maxval");
  validate_dims(static_cast<int>(w), static_cast<int>(h));
  if (maxval == 0) throw std::runtime_error("pgm: maxval 0");
  if (maxval > 65535) throw std::runtime_error("pgm: malformed header: maxval > 65535");

  Image img(static_cast<int>(w), static_cast<int>(h), 0.0, static_cast<double>(maxval));
  const std::size_t n = img.pixel_count();

  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string tok = next_token(in);
      if (tok.empty()) throw std::runtime_error("pgm: truncated raster");
      long v = 0;
      std::size_t pos = 0;
      try {
        v = std::stol(tok, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error("pgm: malformed raster sample '" + tok + "'");
      }
      if (pos != tok.size() || v < 0 || v > maxval)
        throw std::runtime_error("pgm: raster sample out of range");
      img.pixels[i] = static_cast<double>(v);
    }
  } else {
    // single whitespace byte separates maxval from the raster; next_token
    // has already consumed it
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(n * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
      throw std::runtime_error("pgm: truncated raster");
    for (std::size_t i = 0; i < n; ++i) {
      const long v = bytes == 1 ? raw[i] : (static_cast<long>(raw[2 * i]) << 8) | raw[2 * i + 1];
      if (v > maxval) throw std::runtime_error("pgm: raster sample out of range");
      img.pixels[i] = static_cast<double>(v);
    }
  }
  return img;
}

void save_pgm(const Image& image, const std::string& path, bool binary) {
  if (image.width <= 0 || image.height <= 0 || image.pixel_count() != static_cast<std::size_t>(image.width) * image.height)
    throw std::invalid_argument("save_pgm: invalid image");
  const long maxval = std::clamp<long>(std::lround(image.range_max), 1, 255);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("pgm: cannot write '" + path + "'");

  out << (binary ? "P5" : "P2") << "\n" << image.width << " " << image.height << "\n" << maxval << "\n";
  auto quantize = [&](double p) {
    const double clamped = std::clamp(p, 0.0, image.range_max);
    return std::clamp<long>(std::lround(clamped), 0, maxval);
  };
  if (binary) {
    std::vector<unsigned char> raw(image.pixel_count());
    for (std::size_t i = 0; i < raw.size(); ++i)
      raw[i] = static_cast<unsigned char>(quantize(image.pixels[i]));
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  } else {
    for (int r = 0; r < image.height; ++r) {
      for (int c = 0; c < image.width; ++c) {
        out << quantize(image.at(r, c)) << (c + 1 == image.width ? "" : " ");
      }
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("pgm: write failed for '" + path + "'");
}

double mean_power(const Image& image) {
  if (image.pixel_count() == 0) return 0.0;
  double acc = 0.0;
  for (double p : image.pixels) acc += p * p;
  return acc / static_cast<double>(image.pixel_count());
}

std::pair<Image, NoiseSpec> add_awgn(const Image& clean, double snr_db, std::uint64_t seed) {
  const double power = mean_power(clean);
  if (power <= 0.0) throw std::invalid_argument("add_awgn: all-zero image has undefined SNR");
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));

  Image noisy = clean;
  Rng rng(seed);
  for (double& p : noisy.pixels) p += sigma * rng.normal();
  return {std::move(noisy), NoiseSpec{snr_db, seed, sigma}};
}

double psnr(const Image& reference, const Image& test) {
  if (reference.width != test.width || reference.height != test.height)
    throw std::invalid_argument("psnr: dimension mismatch");
  if (reference.range_max != test.range_max)
    throw std::invalid_argument("psnr: range_max mismatch");
  double mse = 0.0;
  for (std::size_t i = 0; i < reference.pixel_count(); ++i) {
    const double d = reference.pixels[i] - test.pixels[i];
    mse += d * d;
  }
  mse /= static_cast<double>(reference.pixel_count());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(reference.range_max * reference.range_max / mse);
}

namespace {

constexpr int kSsimWindow = 11;

// 11-tap Gaussian (sd 1.5) normalized to sum 1.
std::vector<double> ssim_kernel() {
  std::vector<double> k(kSsimWindow);
  const double sd = 1.5;
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double x = i - (kSsimWindow - 1) / 2;
    k[i] = std::exp(-x * x / (2.0 * sd * sd));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

double ssim(const Image& reference, const Image& test) {
  if (reference.width != test.width || reference.height != test.height)
    throw std::invalid_argument("ssim: dimension mismatch");
  if (reference.range_max != test.range_max)
    throw std::invalid_argument("ssim: range_max mismatch");
  if (reference.width < kSsimWindow || reference.height < kSsimWindow)
    throw std::invalid_argument("ssim: image smaller than 11x11 window");

  static const std::vector<double> kernel = ssim_kernel();
  const double c1 = 0.01 * reference.range_max * 0.01 * reference.range_max;
  const double c2 = 0.03 * reference.range_max * 0.03 * reference.range_max;

  const int h = reference.height, w = reference.width;
  const int oh = h - kSsimWindow + 1, ow = w - kSsimWindow + 1;

  // Separable pass: weighted row sums of x, y, x^2, y^2, x*y.
  const int fields = 5;
  std::vector<double> rowpass(static_cast<std::size_t>(h) * ow * fields, 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < ow; ++c) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (int i = 0; i < kSsimWindow; ++i) {
        const double kx = kernel[i];
        const double x = reference.at(r, c + i);
        const double y = test.at(r, c + i);
        sx += kx * x;
        sy += kx * y;
        sxx += kx * x * x;
        syy += kx * y * y;
        sxy += kx * x * y;
      }
      double* out = &rowpass[(static_cast<std::size_t>(r) * ow + c) * fields];
      out[0] = sx;
      out[1] = sy;
      out[2] = sxx;
      out[3] = syy;
      out[4] = sxy;
    }
  }

  double total = 0.0;
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double m[fields] = {0, 0, 0, 0, 0};
      for (int i = 0; i < kSsimWindow; ++i) {
        const double kx = kernel[i];
        const double* in = &rowpass[(static_cast<std::size_t>(r + i) * ow + c) * fields];
        for (int f = 0; f < fields; ++f) m[f] += kx * in[f];
      }
      const double mu1 = m[0], mu2 = m[1];
      const double var1 = m[2] - mu1 * mu1;
      const double var2 = m[3] - mu2 * mu2;
      const double covar = m[4] - mu1 * mu2;
      const double num = (2.0 * mu1 * mu2 + c1) * (2.0 * covar + c2);
      const double den = (mu1 * mu1 + mu2 * mu2 + c1) * (var1 + var2 + c2);
      total += num / den;
    }
  }
  return total / (static_cast<double>(oh) * ow);
}

}  // namespace cofib
