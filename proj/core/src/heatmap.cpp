#include "fieldcal/heatmap.hpp"

#include "fieldcal/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fieldcal {

std::vector<std::uint8_t> heatmap_pixels(std::span<const double> values) {
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
        throw DomainError("heatmap values must be finite");
    }
    std::vector<std::uint8_t> pixels(values.size(), 128);
    if (values.empty()) {
        return pixels;
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double range = *hi - *lo;
    if (range == 0.0) {
        return pixels;
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double level = std::floor((values[i] - *lo) / range * 255.0 + 0.5);
        pixels[i] = static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0));
    }
    return pixels;
}

void write_heatmap(const FieldFile& field, const std::filesystem::path& path) {
    if (field.values.size() != field.grid.size()) {
        throw DomainError("heatmap field value count does not match its grid");
    }
    const auto pixels = heatmap_pixels(field.values);
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write heatmap " + path.string());
        }
        out << "P5\n" << field.grid.nx << ' ' << field.grid.ny << "\n255\n";
        out.write(reinterpret_cast<const char*>(pixels.data()),
                  static_cast<std::streamsize>(pixels.size()));
        if (!out) {
            throw std::runtime_error("write failed for heatmap " + path.string());
        }
    }

    auto sidecar = path;
    sidecar.replace_extension(".range.txt");
    std::ofstream range(sidecar);
    if (!range) {
        throw std::runtime_error("cannot write heatmap range file " + sidecar.string());
    }
    const auto [lo, hi] = std::minmax_element(field.values.begin(), field.values.end());
    range << "min " << format_number(field.values.empty() ? 0.0 : *lo) << '\n'
          << "max " << format_number(field.values.empty() ? 0.0 : *hi) << '\n';
}

} // namespace fieldcal
