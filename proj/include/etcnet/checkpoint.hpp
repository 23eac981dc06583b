#pragma once

#include <filesystem>
#include <string>

#include "etcnet/mlp.hpp"

namespace etcnet {

/// One JSON file per network: layer sizes, activations, row-major weight
/// arrays, Adam moments, and the Adam step counter.
void save_mlp(const std::filesystem::path& path, const Mlp& net);

/// Loads and re-validates all shape invariants. Throws std::runtime_error
/// on a malformed or inconsistent file.
Mlp load_mlp(const std::filesystem::path& path);

}  // namespace etcnet
