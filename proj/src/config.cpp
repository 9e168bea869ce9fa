#include "cofib/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cofib {

void DenoiseConfig::validate() const {
  if (patch_n < 3 || patch_n % 2 == 0)
    throw std::invalid_argument("config: patch_n must be odd and >= 3");
  if (clusters_k < 1) throw std::invalid_argument("config: clusters_k must be >= 1");
  if (collab_t < 1) throw std::invalid_argument("config: collab_t must be >= 1");
  if (collab_rounds < 0) throw std::invalid_argument("config: collab_rounds must be >= 0");
  if (dict_atoms <= patch_n * patch_n)
    throw std::invalid_argument("config: dict_atoms must exceed patch_n^2");
  if (ksvd_iters < 1) throw std::invalid_argument("config: ksvd_iters must be >= 1");
  if (ksvd_sparsity < 1) throw std::invalid_argument("config: ksvd_sparsity must be >= 1");
  if (max_support < 1 || max_support > patch_n * patch_n)
    throw std::invalid_argument("config: max_support must be in [1, patch_n^2]");
  if (beam_width < 1) throw std::invalid_argument("config: beam_width must be >= 1");
  if (noise_sigma && !(*noise_sigma > 0.0))
    throw std::invalid_argument("config: noise_sigma must be positive");
  if (train_sample_cap < 1) throw std::invalid_argument("config: train_sample_cap must be >= 1");
}

DenoiseConfig config_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");

  static const std::set<std::string> known = {
      "patch_n",     "clusters_k",   "collab_t",    "collab_rounds", "dict_atoms",
      "ksvd_iters",  "ksvd_sparsity", "max_support", "beam_width",    "noise_sigma",
      "seed",        "train_sample_cap"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key()))
      throw std::invalid_argument("config: unknown key '" + it.key() + "'");
  }

  DenoiseConfig cfg;
  auto get_int = [&](const char* key, int& field) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer())
      throw std::invalid_argument(std::string("config: '") + key + "' must be an integer");
    field = j[key].get<int>();
  };
  get_int("patch_n", cfg.patch_n);
  if (j.contains("patch_n") && !j.contains("dict_atoms"))
    cfg.dict_atoms = 2 * cfg.patch_n * cfg.patch_n;  // default tracks the patch size
  get_int("clusters_k", cfg.clusters_k);
  get_int("collab_t", cfg.collab_t);
  get_int("collab_rounds", cfg.collab_rounds);
  get_int("dict_atoms", cfg.dict_atoms);
  get_int("ksvd_iters", cfg.ksvd_iters);
  get_int("ksvd_sparsity", cfg.ksvd_sparsity);
  get_int("max_support", cfg.max_support);
  get_int("beam_width", cfg.beam_width);
  get_int("train_sample_cap", cfg.train_sample_cap);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer())
      throw std::invalid_argument("config: 'seed' must be an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("noise_sigma")) {
    const auto& v = j["noise_sigma"];
    if (v.is_string()) {
      if (v.get<std::string>() != "estimate")
        throw std::invalid_argument("config: noise_sigma must be a number or \"estimate\"");
      cfg.noise_sigma.reset();
    } else if (v.is_number()) {
      cfg.noise_sigma = v.get<double>();
    } else {
      throw std::invalid_argument("config: noise_sigma must be a number or \"estimate\"");
    }
  }
  cfg.validate();
  return cfg;
}

DenoiseConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const DenoiseConfig& cfg) {
  nlohmann::ordered_json j;
  j["patch_n"] = cfg.patch_n;
  j["clusters_k"] = cfg.clusters_k;
  j["collab_t"] = cfg.collab_t;
  j["collab_rounds"] = cfg.collab_rounds;
  j["dict_atoms"] = cfg.dict_atoms;
  j["ksvd_iters"] = cfg.ksvd_iters;
  j["ksvd_sparsity"] = cfg.ksvd_sparsity;
  j["max_support"] = cfg.max_support;
  j["beam_width"] = cfg.beam_width;
  if (cfg.noise_sigma)
    j["noise_sigma"] = *cfg.noise_sigma;
  else
    j["noise_sigma"] = "estimate";
  j["seed"] = cfg.seed;
  j["train_sample_cap"] = cfg.train_sample_cap;
  return j.dump();
}

}  // namespace cofib
