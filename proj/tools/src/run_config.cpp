#include "xmodal_cli/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "xmodal/errors.hpp"

namespace xmodal::cli {

namespace {

using nlohmann::json;

const std::set<std::string> kTopLevelKeys = {
    "loss",  "a",     "b",     "mining_margin", "mining",   "triplet_margin", "sim_domain",
    "embed_dim", "hidden_dim", "lr", "beta1", "beta2", "eps", "lr_decay", "lr_decay_epoch",
    "epochs", "batch_size", "seed", "data", "synthetic", "out"};

const std::set<std::string> kSyntheticKeys = {"classes",    "per_class", "latent_dim", "visual_dim",
                                              "text_dim",   "noise_sigma", "seed"};

template <typename T>
void read(const json& j, const char* key, T& target) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      target = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("config: field '") + key + "' has the wrong type");
    }
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("config: unknown field '" + key + "' in " + where);
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  reject_unknown(j, kTopLevelKeys, "config");

  RunConfig cfg;
  auto& t = cfg.train;
  if (j.contains("loss")) {
    std::string kind;
    read(j, "loss", kind);
    t.loss.kind = parse_loss_kind(kind);
  }
  read(j, "a", t.loss.coefficients.pos);
  read(j, "b", t.loss.coefficients.neg);
  read(j, "mining_margin", t.loss.coefficients.mining_margin);
  read(j, "mining", t.loss.mining_enabled);
  read(j, "triplet_margin", t.loss.triplet_margin);
  if (j.contains("sim_domain")) {
    std::vector<double> domain;
    read(j, "sim_domain", domain);
    if (domain.size() != 2) throw ConfigError("config: 'sim_domain' must be [lo, hi]");
    t.loss.coefficients.domain = {domain[0], domain[1]};
  }
  read(j, "embed_dim", t.embed_dim);
  read(j, "hidden_dim", t.hidden_dim);
  read(j, "lr", t.adam.lr);
  read(j, "beta1", t.adam.beta1);
  read(j, "beta2", t.adam.beta2);
  read(j, "eps", t.adam.eps);
  read(j, "lr_decay", t.lr_decay);
  read(j, "lr_decay_epoch", t.lr_decay_epoch);
  read(j, "epochs", t.epochs);
  read(j, "batch_size", t.batch_size);
  read(j, "seed", t.seed);
  if (j.contains("data")) {
    std::string path;
    read(j, "data", path);
    cfg.data = path;
  }
  if (auto it = j.find("synthetic"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("config: 'synthetic' must be an object");
    reject_unknown(*it, kSyntheticKeys, "'synthetic'");
    auto& s = cfg.synthetic;
    read(*it, "classes", s.num_classes);
    read(*it, "per_class", s.pairs_per_class);
    read(*it, "latent_dim", s.latent_dim);
    read(*it, "visual_dim", s.visual_dim);
    read(*it, "text_dim", s.text_dim);
    read(*it, "noise_sigma", s.noise_sigma);
    read(*it, "seed", s.seed);
  }
  if (j.contains("out")) {
    std::string out;
    read(j, "out", out);
    cfg.out = out;
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return run_config_from_json(ss.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
  const auto& t = cfg.train;
  nlohmann::ordered_json j;
  j["loss"] = std::string(to_string(t.loss.kind));
  j["a"] = t.loss.coefficients.pos;
  j["b"] = t.loss.coefficients.neg;
  j["mining_margin"] = t.loss.coefficients.mining_margin;
  j["mining"] = t.loss.mining_enabled;
  j["triplet_margin"] = t.loss.triplet_margin;
  j["sim_domain"] = {t.loss.coefficients.domain.lo, t.loss.coefficients.domain.hi};
  j["embed_dim"] = t.embed_dim;
  j["hidden_dim"] = t.hidden_dim;
  j["lr"] = t.adam.lr;
  j["beta1"] = t.adam.beta1;
  j["beta2"] = t.adam.beta2;
  j["eps"] = t.adam.eps;
  j["lr_decay"] = t.lr_decay;
  j["lr_decay_epoch"] = t.lr_decay_epoch;
  j["epochs"] = t.epochs;
  j["batch_size"] = t.batch_size;
  j["seed"] = t.seed;
  if (cfg.data) j["data"] = cfg.data->string();
  const auto& s = cfg.synthetic;
  j["synthetic"] = {{"classes", s.num_classes},       {"per_class", s.pairs_per_class},
                    {"latent_dim", s.latent_dim},     {"visual_dim", s.visual_dim},
                    {"text_dim", s.text_dim},         {"noise_sigma", s.noise_sigma},
                    {"seed", s.seed}};
  j["out"] = cfg.out.string();
  return j.dump(2);
}

void validate(const RunConfig& config) {
  xmodal::validate(config.train);
  if (config.data) {
    if (!std::filesystem::exists(*config.data))
      throw ConfigError("data file '" + config.data->string() + "' does not exist");
  } else {
    xmodal::validate(config.synthetic);
  }
}

FeaturePairSet resolve_dataset(const RunConfig& config) {
  if (config.data) return load_dataset(*config.data);
  return generate_synthetic(config.synthetic);
}

}  // namespace xmodal::cli
