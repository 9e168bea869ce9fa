#include "cofib/bench.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cofib/pipeline.hpp"

namespace cofib {

std::vector<double> default_snr_sweep() {
  std::vector<double> snrs;
  for (int s = -5; s <= 35; s += 5) snrs.push_back(static_cast<double>(s));
  return snrs;
}

namespace {

BenchRecord run_point(const Image& clean, const std::string& name, double snr_db,
                      const DenoiseConfig& cfg, std::uint64_t noise_seed) {
  auto [noisy, spec] = add_awgn(clean, snr_db, noise_seed);
  DenoiseConfig run_cfg = cfg;
  run_cfg.noise_sigma = spec.sigma;
  const DenoiseReport report = denoise_image(noisy, run_cfg);

  BenchRecord rec;
  rec.image_name = name;
  rec.width = clean.width;
  rec.height = clean.height;
  rec.snr_db = snr_db;
  rec.psnr_noisy = psnr(clean, noisy);
  rec.psnr_denoised = psnr(clean, report.denoised);
  rec.ssim_noisy = ssim(clean, noisy);
  rec.ssim_denoised = ssim(clean, report.denoised);
  rec.wall_time_s = report.wall_time_s;
  rec.seed = noise_seed;
  return rec;
}

}  // namespace

std::vector<BenchRecord> run_snr_sweep(const Image& clean, const std::string& image_name,
                                       const std::vector<double>& snrs, const DenoiseConfig& cfg,
                                       std::uint64_t seed) {
  if (snrs.empty()) throw std::invalid_argument("run_snr_sweep: empty SNR list");
  std::vector<BenchRecord> records;
  records.reserve(snrs.size());
  for (std::size_t i = 0; i < snrs.size(); ++i)
    records.push_back(run_point(clean, image_name, snrs[i], cfg, seed + i));
  return records;
}

Image center_crop(const Image& image, int crop_h, int crop_w) {
  if (crop_h < 1 || crop_w < 1 || crop_h > image.height || crop_w > image.width)
    throw std::invalid_argument("center_crop: crop exceeds image");
  const int r0 = (image.height - crop_h) / 2;
  const int c0 = (image.width - crop_w) / 2;
  Image out(crop_w, crop_h, 0.0, image.range_max);
  for (int r = 0; r < crop_h; ++r)
    for (int c = 0; c < crop_w; ++c) out.at(r, c) = image.at(r0 + r, c0 + c);
  return out;
}

Image box_downsample(const Image& image, int factor) {
  if (factor < 1) throw std::invalid_argument("box_downsample: factor must be >= 1");
  if (factor == 1) return image;
  if (image.width % factor != 0 || image.height % factor != 0)
    throw std::invalid_argument("box_downsample: dimensions not divisible by factor");
  Image out(image.width / factor, image.height / factor, 0.0, image.range_max);
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (int r = 0; r < out.height; ++r) {
    for (int c = 0; c < out.width; ++c) {
      double acc = 0.0;
      for (int rr = 0; rr < factor; ++rr)
        for (int cc = 0; cc < factor; ++cc) acc += image.at(r * factor + rr, c * factor + cc);
      out.at(r, c) = acc * inv;
    }
  }
  return out;
}

Image resize_to_side(const Image& image, int side) {
  if (side < 1 || side > std::min(image.width, image.height))
    throw std::invalid_argument("resize_to_side: side larger than source");
  const int factor = std::min(image.width, image.height) / side;
  return box_downsample(center_crop(image, side * factor, side * factor), factor);
}

std::vector<BenchRecord> run_resolution_sweep(const Image& clean, const std::string& image_name,
                                              const std::vector<int>& sides, double snr_db,
                                              const DenoiseConfig& cfg, std::uint64_t seed) {
  if (sides.empty()) throw std::invalid_argument("run_resolution_sweep: empty side list");
  std::vector<BenchRecord> records;
  records.reserve(sides.size());
  for (std::size_t i = 0; i < sides.size(); ++i) {
    const Image scaled = resize_to_side(clean, sides[i]);
    records.push_back(run_point(scaled, image_name, snr_db, cfg, seed + i));
  }
  return records;
}

std::string format_real(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

namespace {

constexpr const char* kCsvHeader =
    "image,width,height,snr_db,psnr_noisy,psnr_denoised,ssim_noisy,ssim_denoised,wall_time_s,seed";

double parse_real(const std::string& tok) {
  if (tok == "inf") return std::numeric_limits<double>::infinity();
  if (tok == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double v = std::stod(tok, &pos);
  if (pos != tok.size()) throw std::runtime_error("csv: bad real '" + tok + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void emit_csv(const std::vector<BenchRecord>& records, const std::string& path) {
  if (records.empty()) throw std::invalid_argument("emit_csv: no records");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("csv: cannot write '" + path + "'");
  out << kCsvHeader << "\n";
  for (const BenchRecord& r : records) {
    std::string name = r.image_name;
    for (char& ch : name) {
      if (ch == ',' || ch == '\n' || ch == '\r') ch = '_';
    }
    out << name << ',' << r.width << ',' << r.height << ',' << format_real(r.snr_db) << ','
        << format_real(r.psnr_noisy) << ',' << format_real(r.psnr_denoised) << ','
        << format_real(r.ssim_noisy) << ',' << format_real(r.ssim_denoised) << ','
        << format_real(r.wall_time_s) << ',' << r.seed << "\n";
  }
  if (!out) throw std::runtime_error("csv: write failed for '" + path + "'");
}

std::vector<BenchRecord> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::runtime_error("csv: unexpected header");

  std::vector<BenchRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv_line(line);
    if (cols.size() != 10) throw std::runtime_error("csv: expected 10 columns");
    BenchRecord r;
    r.image_name = cols[0];
    r.width = std::stoi(cols[1]);
    r.height = std::stoi(cols[2]);
    r.snr_db = parse_real(cols[3]);
    r.psnr_noisy = parse_real(cols[4]);
    r.psnr_denoised = parse_real(cols[5]);
    r.ssim_noisy = parse_real(cols[6]);
    r.ssim_denoised = parse_real(cols[7]);
    r.wall_time_s = parse_real(cols[8]);
    r.seed = std::stoull(cols[9]);
    records.push_back(std::move(r));
  }
  return records;
}

void emit_svg_chart(const std::vector<BenchRecord>& records, const std::string& path) {
  if (records.empty()) throw std::invalid_argument("emit_svg_chart: no records");

  const double width = 640.0, height = 480.0;
  const double ml = 70.0, mr = 20.0, mt = 40.0, mb = 55.0;

  double xmin = records.front().snr_db, xmax = xmin;
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const BenchRecord& r : records) {
    xmin = std::min(xmin, r.snr_db);
    xmax = std::max(xmax, r.snr_db);
    if (std::isfinite(r.psnr_denoised)) {
      ymin = std::min(ymin, r.psnr_denoised);
      ymax = std::max(ymax, r.psnr_denoised);
    }
  }
  if (!std::isfinite(ymin)) {
    ymin = 0.0;
    ymax = 1.0;
  }
  if (xmax - xmin < 1e-9) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymax - ymin < 1e-9) {
    ymin -= 1.0;
    ymax += 1.0;
  }

  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
  auto sy = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream points;
  for (const BenchRecord& r : records) {
    const double y = std::isfinite(r.psnr_denoised) ? r.psnr_denoised : ymax;
    points << fmt(sx(r.snr_db)) << ',' << fmt(sy(y)) << ' ';
  }
  std::string pts = points.str();
  if (!pts.empty()) pts.pop_back();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("svg: cannot write '" + path + "'");
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n"
      << "  <text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"15\">denoised PSNR vs input SNR</text>\n"
      << "  <line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n"
      << "  <line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n"
      << "  <text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">input SNR (dB)</text>\n"
      << "  <text x=\"18\" y=\"" << (mt + height - mb) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
      << (mt + height - mb) / 2 << ")\">PSNR denoised (dB)</text>\n"
      << "  <text x=\"" << ml << "\" y=\"" << height - mb + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << format_real(xmin)
      << "</text>\n"
      << "  <text x=\"" << width - mr << "\" y=\"" << height - mb + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << format_real(xmax)
      << "</text>\n"
      << "  <text x=\"" << ml - 8 << "\" y=\"" << height - mb + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << format_real(ymin)
      << "</text>\n"
      << "  <text x=\"" << ml - 8 << "\" y=\"" << mt + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << format_real(ymax)
      << "</text>\n"
      << "  <polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"" << pts
      << "\"/>\n"
      << "</svg>\n";
  if (!out) throw std::runtime_error("svg: write failed for '" + path + "'");
}

}  // namespace cofib
