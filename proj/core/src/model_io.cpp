#include "xmodal/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "xmodal/errors.hpp"

namespace xmodal {

namespace {

constexpr const char* kFormatTag = "xmodal-model-v1";

nlohmann::ordered_json tower_to_json(const Tower& tower) {
  auto layers = nlohmann::ordered_json::array();
  for (const Matrix& w : tower.weights) {
    nlohmann::ordered_json j;
    j["rows"] = w.rows();
    j["cols"] = w.cols();
    j["data"] = std::vector<double>(w.values().begin(), w.values().end());
    layers.push_back(std::move(j));
  }
  return layers;
}

Tower tower_from_json(const nlohmann::json& j, const char* which) {
  if (!j.is_array() || j.empty() || j.size() > 2)
    throw FormatError(std::string("model file: '") + which + "' must hold one or two weight matrices");
  Tower tower;
  for (const auto& layer : j) {
    const auto rows = layer.at("rows").get<std::size_t>();
    const auto cols = layer.at("cols").get<std::size_t>();
    auto data = layer.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols) throw FormatError(std::string("model file: bad matrix size in '") + which + "'");
    tower.weights.emplace_back(rows, cols, std::move(data));
    if (!tower.weights.back().all_finite()) throw FormatError("model file: non-finite weight");
  }
  if (tower.has_hidden() && tower.weights[0].cols() != tower.weights[1].rows())
    throw FormatError(std::string("model file: layer shapes do not chain in '") + which + "'");
  return tower;
}

}  // namespace

std::string model_to_json(const EncoderParams& params) {
  nlohmann::ordered_json j;
  j["format"] = kFormatTag;
  j["embed_dim"] = params.embed_dim();
  j["hidden_dim"] = params.hidden_dim();
  j["visual"] = tower_to_json(params.visual);
  j["text"] = tower_to_json(params.text);
  return j.dump();
}

EncoderParams model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != kFormatTag) throw FormatError("model file: missing or unknown format tag");
    EncoderParams params{tower_from_json(j.at("visual"), "visual"), tower_from_json(j.at("text"), "text")};
    if (params.visual.output_dim() != params.text.output_dim() ||
        params.visual.has_hidden() != params.text.has_hidden())
      throw FormatError("model file: visual and text towers disagree on shape");
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model file: ") + e.what());
  }
}

void save_model(const EncoderParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out << model_to_json(params) << '\n';
  if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

EncoderParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace xmodal
