#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cofib/bench.hpp"
#include "cofib/config.hpp"
#include "cofib/image.hpp"
#include "cofib/pipeline.hpp"

namespace {

constexpr int kExitBadArgs = 1;
constexpr int kExitIo = 2;
constexpr int kExitPipeline = 3;

struct CliError {
  int code;
  std::string message;
};

cofib::Image load_input(const std::string& path) {
  try {
    return cofib::load_pgm(path);
  } catch (const std::exception& e) {
    throw CliError{kExitIo, e.what()};
  }
}

cofib::DenoiseConfig resolve_config(const std::string& config_path,
                                    const std::optional<double>& sigma,
                                    const std::optional<std::uint64_t>& seed) {
  cofib::DenoiseConfig cfg;
  if (!config_path.empty()) {
    try {
      cfg = cofib::load_config(config_path);
    } catch (const std::runtime_error& e) {
      throw CliError{kExitIo, e.what()};  // unreadable file
    } catch (const std::invalid_argument& e) {
      throw CliError{kExitBadArgs, e.what()};  // bad schema / unknown key
    }
  }
  if (sigma) cfg.noise_sigma = *sigma;
  if (seed) cfg.seed = *seed;
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw CliError{kExitBadArgs, e.what()};
  }
  return cfg;
}

// JSON value for a metric: number, or the string "inf" when not finite.
nlohmann::ordered_json metric_json(double v) {
  if (std::isfinite(v)) return v;
  return cofib::format_real(v);
}

std::string stem_of(const std::string& path) {
  const std::string stem = std::filesystem::path(path).stem().string();
  return stem.empty() ? path : stem;
}

int cmd_denoise(const std::string& input, const std::string& output, const std::string& config_path,
                const std::optional<double>& sigma, const std::optional<std::uint64_t>& seed,
                const std::string& reference) {
  const cofib::DenoiseConfig cfg = resolve_config(config_path, sigma, seed);
  const cofib::Image noisy = load_input(input);

  cofib::DenoiseReport report;
  try {
    report = cofib::denoise_image(noisy, cfg);
  } catch (const std::exception& e) {
    throw CliError{kExitPipeline, e.what()};
  }
  try {
    cofib::save_pgm(report.denoised, output);
  } catch (const std::exception& e) {
    throw CliError{kExitIo, e.what()};
  }

  nlohmann::ordered_json summary;
  summary["input"] = input;
  summary["output"] = output;
  summary["width"] = report.denoised.width;
  summary["height"] = report.denoised.height;
  summary["sigma"] = cfg.noise_sigma ? nlohmann::ordered_json(*cfg.noise_sigma)
                                     : nlohmann::ordered_json("estimate");
  summary["seed"] = cfg.seed;
  summary["wall_time_s"] = report.wall_time_s;
  if (!reference.empty()) {
    const cofib::Image clean = load_input(reference);
    try {
      summary["psnr_noisy"] = metric_json(cofib::psnr(clean, noisy));
      summary["psnr_denoised"] = metric_json(cofib::psnr(clean, report.denoised));
      summary["ssim_noisy"] = metric_json(cofib::ssim(clean, noisy));
      summary["ssim_denoised"] = metric_json(cofib::ssim(clean, report.denoised));
    } catch (const std::exception& e) {
      throw CliError{kExitPipeline, e.what()};
    }
  }
  std::cout << summary.dump() << "\n";
  return 0;
}

// Zeroes timing before the CSV is written so reruns with the same seed are
// byte-identical; measured times go to stderr.
void write_records(std::vector<cofib::BenchRecord> records, const std::string& csv_path,
                   const std::string& svg_path) {
  for (cofib::BenchRecord& r : records) {
    std::cerr << "[sweep] " << r.image_name << " " << r.width << "x" << r.height
              << " snr=" << cofib::format_real(r.snr_db)
              << "dB psnr_denoised=" << cofib::format_real(r.psnr_denoised)
              << "dB wall=" << cofib::format_real(r.wall_time_s) << "s\n";
    r.wall_time_s = 0.0;
  }
  try {
    cofib::emit_csv(records, csv_path);
    if (!svg_path.empty()) cofib::emit_svg_chart(records, svg_path);
  } catch (const std::exception& e) {
    throw CliError{kExitIo, e.what()};
  }
}

int cmd_sweep_snr(const std::string& input, const std::string& csv_path,
                  const std::string& svg_path, const std::vector<double>& snrs,
                  const std::string& config_path, std::uint64_t seed, std::string name) {
  const cofib::DenoiseConfig cfg = resolve_config(config_path, std::nullopt, seed);
  const cofib::Image clean = load_input(input);
  if (name.empty()) name = stem_of(input);
  std::vector<cofib::BenchRecord> records;
  try {
    records = cofib::run_snr_sweep(clean, name, snrs.empty() ? cofib::default_snr_sweep() : snrs,
                                   cfg, seed);
  } catch (const std::exception& e) {
    throw CliError{kExitPipeline, e.what()};
  }
  write_records(std::move(records), csv_path, svg_path);
  return 0;
}

int cmd_sweep_res(const std::string& input, const std::string& csv_path,
                  const std::vector<int>& sides, double snr_db, const std::string& config_path,
                  std::uint64_t seed, std::string name) {
  const cofib::DenoiseConfig cfg = resolve_config(config_path, std::nullopt, seed);
  const cofib::Image clean = load_input(input);
  if (name.empty()) name = stem_of(input);
  std::vector<cofib::BenchRecord> records;
  try {
    records = cofib::run_resolution_sweep(clean, name, sides, snr_db, cfg, seed);
  } catch (const std::exception& e) {
    throw CliError{kExitPipeline, e.what()};
  }
  write_records(std::move(records), csv_path, "");
  return 0;
}

int cmd_chart(const std::string& input, const std::string& output) {
  try {
    const std::vector<cofib::BenchRecord> records = cofib::parse_csv(input);
    cofib::emit_svg_chart(records, output);
  } catch (const std::exception& e) {
    throw CliError{kExitIo, e.what()};
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CoFiB collaborative-filtering image denoiser"};
  app.require_subcommand(1);

  std::string input, output, config_path, reference, csv_path, svg_path, name;
  std::optional<double> sigma;
  std::optional<std::uint64_t> seed_opt;
  std::uint64_t seed = 0;
  std::vector<double> snrs;
  std::vector<int> sides{64, 128, 256};
  double res_snr = 20.0;

  CLI::App* denoise = app.add_subcommand("denoise", "Denoise one PGM image");
  denoise->add_option("--input", input, "noisy input PGM")->required();
  denoise->add_option("--output", output, "denoised output PGM")->required();
  denoise->add_option("--config", config_path, "JSON config file");
  denoise->add_option("--sigma", sigma, "known noise standard deviation");
  denoise->add_option("--seed", seed_opt, "RNG seed");
  denoise->add_option("--reference", reference, "clean reference PGM for metrics");

  CLI::App* sweep_snr = app.add_subcommand("sweep-snr", "SNR sweep benchmark");
  sweep_snr->add_option("--input", input, "clean source PGM")->required();
  sweep_snr->add_option("--csv", csv_path, "output CSV path")->required();
  sweep_snr->add_option("--svg", svg_path, "optional SVG chart path");
  sweep_snr->add_option("--snrs", snrs, "SNR points in dB (default -5..35 step 5)");
  sweep_snr->add_option("--config", config_path, "JSON config file");
  sweep_snr->add_option("--seed", seed, "base seed");
  sweep_snr->add_option("--name", name, "image name for the records");

  CLI::App* sweep_res = app.add_subcommand("sweep-res", "resolution sweep benchmark");
  sweep_res->add_option("--input", input, "clean source PGM")->required();
  sweep_res->add_option("--csv", csv_path, "output CSV path")->required();
  sweep_res->add_option("--sides", sides, "square sides (default 64 128 256)");
  sweep_res->add_option("--snr", res_snr, "SNR in dB (default 20)");
  sweep_res->add_option("--config", config_path, "JSON config file");
  sweep_res->add_option("--seed", seed, "base seed");
  sweep_res->add_option("--name", name, "image name for the records");

  CLI::App* chart = app.add_subcommand("chart", "render an SVG chart from a sweep CSV");
  chart->add_option("--input", input, "sweep CSV")->required();
  chart->add_option("--output", output, "output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadArgs;
  }

  try {
    if (denoise->parsed())
      return cmd_denoise(input, output, config_path, sigma, seed_opt, reference);
    if (sweep_snr->parsed())
      return cmd_sweep_snr(input, csv_path, svg_path, snrs, config_path, seed, name);
    if (sweep_res->parsed())
      return cmd_sweep_res(input, csv_path, sides, res_snr, config_path, seed, name);
    if (chart->parsed()) return cmd_chart(input, output);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return kExitBadArgs;
}
