#pragma once

#include "semvol/embeddings.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace semvol::presets {

/// 17-joint COCO-style skeleton.
std::vector<CompoundTerm> joints17();
/// 32-joint depth-camera skeleton.
std::vector<CompoundTerm> joints32();
/// 7 furniture-assembly part classes.
std::vector<CompoundTerm> objects7();
/// 12 cabinet-assembly object classes.
std::vector<CompoundTerm> objects12();

/// Resolves "17", "32", "17+7", "32+12" (any skeleton + object combination).
std::optional<std::vector<CompoundTerm>> class_list(std::string_view name);

}  // namespace semvol::presets
