#ifndef XMODAL_MODEL_IO_HPP
#define XMODAL_MODEL_IO_HPP

#include <filesystem>
#include <string>

#include "xmodal/model.hpp"

namespace xmodal {

/// JSON model file:
///   {"format": "xmodal-model-v1", "visual": [W...], "text": [W...]}
/// where every W is {"rows": r, "cols": c, "data": [row-major values]}.
/// Doubles are written at round-trip precision, so save/load is exact.
std::string model_to_json(const EncoderParams& params);
EncoderParams model_from_json(const std::string& text);

void save_model(const EncoderParams& params, const std::filesystem::path& path);
/// Throws FormatError on unreadable files or malformed content.
EncoderParams load_model(const std::filesystem::path& path);

}  // namespace xmodal

#endif  // XMODAL_MODEL_IO_HPP
