#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ivis/model.hpp"

namespace ivis {

inline constexpr std::string_view kModelMagic = "GBXM";
inline constexpr unsigned char kModelFormatVersion = 1;

/// Serialized model bytes (see docs/model-format.md for the layout).
[[nodiscard]] std::string serialize_model(const Model& model);
/// Parses serialized bytes; throws ModelFormatError with a distinct kind per failure.
[[nodiscard]] Model parse_model(std::string_view bytes);

void save_model(const Model& model, const std::filesystem::path& path);
[[nodiscard]] Model load_model(const std::filesystem::path& path);

}  // namespace ivis
