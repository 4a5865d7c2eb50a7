#pragma once

#include "fieldcal/field_io.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace fieldcal {

/// Linear min-max map onto 0..255, rounding half up. A constant field maps
/// to 128 everywhere. Throws DomainError on non-finite input.
std::vector<std::uint8_t> heatmap_pixels(std::span<const double> values);

/// Binary PGM (P5), width nx, height ny, rows in file order. Writes
/// "<stem>.range.txt" next to the image holding the min and max used for
/// normalization.
void write_heatmap(const FieldFile& field, const std::filesystem::path& path);

} // namespace fieldcal
