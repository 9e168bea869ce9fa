#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace cofib {

// Every tunable of the denoiser. noise_sigma empty means "estimate from the
// noisy image". JSON form uses exactly these field names; noise_sigma is a
// number or the string "estimate"; unknown keys are rejected.
struct DenoiseConfig {
  int patch_n = 7;
  int clusters_k = 5;
  int collab_t = 10;
  int collab_rounds = 1;
  int dict_atoms = 2 * 7 * 7;
  int ksvd_iters = 20;
  int ksvd_sparsity = 4;
  int max_support = 8;
  int beam_width = 4;
  std::optional<double> noise_sigma;  // empty = estimate
  std::uint64_t seed = 0;
  int train_sample_cap = 20000;

  // Throws std::invalid_argument when a field is out of contract.
  void validate() const;
};

DenoiseConfig config_from_json(const std::string& json_text);
DenoiseConfig load_config(const std::string& path);
std::string config_to_json(const DenoiseConfig& cfg);

}  // namespace cofib
