#include "fieldcal/field_io.hpp"

#include "fieldcal/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

namespace fieldcal {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string where(const std::string& source, std::size_t line_no) {
    return source + ":" + std::to_string(line_no) + ": ";
}

double parse_double(std::string_view token, const std::string& context) {
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
        throw FormatError(context + "'" + std::string(token) + "' is not a number");
    }
    if (!std::isfinite(value)) {
        throw FormatError(context + "value '" + std::string(token) + "' is not finite");
    }
    return value;
}

std::size_t parse_size(std::string_view token, const std::string& context) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
        throw FormatError(context + "'" + std::string(token) + "' is not a non-negative integer");
    }
    return value;
}

bool skippable(std::string_view line) {
    line = trim(line);
    return line.empty() || line.front() == '#';
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open " + path.string());
    }
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

} // namespace

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

FieldFile parse_field(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    // Header
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    auto header = trim(line);
    if (header.empty() || header.front() != '#') {
        throw FormatError(where(source, line_no) + "missing '# nx=..,ny=..,dx=..,dy=..,x0=..,y0=..' header");
    }
    header.remove_prefix(1);
    std::map<std::string, std::string_view, std::less<>> keys;
    for (const auto item : split(header, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw FormatError(where(source, line_no) + "header entry '" + std::string(item) +
                              "' is not key=value");
        }
        keys[std::string(trim(item.substr(0, eq)))] = trim(item.substr(eq + 1));
    }
    auto need = [&](const char* key) {
        const auto it = keys.find(key);
        if (it == keys.end()) {
            throw FormatError(where(source, line_no) + "header is missing '" + key + "'");
        }
        return it->second;
    };
    const auto ctx = where(source, line_no);
    FieldFile field;
    field.grid.nx = parse_size(need("nx"), ctx + "nx: ");
    field.grid.ny = parse_size(need("ny"), ctx + "ny: ");
    field.grid.dx = parse_double(need("dx"), ctx + "dx: ");
    field.grid.dy = parse_double(need("dy"), ctx + "dy: ");
    field.grid.x0 = parse_double(need("x0"), ctx + "x0: ");
    field.grid.y0 = parse_double(need("y0"), ctx + "y0: ");
    if (field.grid.nx == 0 || field.grid.ny == 0) {
        throw FormatError(ctx + "nx and ny must be positive");
    }
    if (!(field.grid.dx > 0.0) || !(field.grid.dy > 0.0)) {
        throw FormatError(ctx + "dx and dy must be positive");
    }

    field.values.reserve(field.grid.size());
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto cells = split(line, ',');
        if (cells.size() != field.grid.nx) {
            throw FormatError(where(source, line_no) + "expected " + std::to_string(field.grid.nx) +
                              " values, found " + std::to_string(cells.size()));
        }
        if (++rows > field.grid.ny) {
            throw FormatError(where(source, line_no) + "more than ny=" +
                              std::to_string(field.grid.ny) + " rows");
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            field.values.push_back(
                parse_double(cells[c], where(source, line_no) + "column " + std::to_string(c + 1) + ": "));
        }
    }
    if (rows != field.grid.ny) {
        throw FormatError(source + ": expected ny=" + std::to_string(field.grid.ny) + " rows, found " +
                          std::to_string(rows));
    }
    return field;
}

void write_field(std::ostream& out, const FieldFile& field) {
    const auto& g = field.grid;
    out << "# nx=" << g.nx << ",ny=" << g.ny << ",dx=" << format_number(g.dx)
        << ",dy=" << format_number(g.dy) << ",x0=" << format_number(g.x0)
        << ",y0=" << format_number(g.y0) << '\n';
    for (std::size_t r = 0; r < g.ny; ++r) {
        for (std::size_t c = 0; c < g.nx; ++c) {
            if (c) out << ',';
            out << format_number(field.values[r * g.nx + c]);
        }
        out << '\n';
    }
}

FieldFile read_field_file(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_field(in, path.string());
}

void write_field_file(const std::filesystem::path& path, const FieldFile& field) {
    if (field.values.size() != field.grid.size()) {
        throw DomainError("field value count does not match its grid");
    }
    auto out = open_out(path);
    write_field(out, field);
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

std::vector<SensorRecord> parse_sensors(std::istream& in, const std::string& source) {
    std::vector<SensorRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) continue;
        const auto cells = split(line, ',');
        if (cells.size() != 3) {
            throw FormatError(where(source, line_no) + "expected x,y,value, found " +
                              std::to_string(cells.size()) + " columns");
        }
        const auto ctx = where(source, line_no);
        records.push_back({parse_double(cells[0], ctx + "x: "), parse_double(cells[1], ctx + "y: "),
                           parse_double(cells[2], ctx + "value: ")});
    }
    if (records.empty()) {
        throw FormatError(source + ": no sensor rows");
    }
    return records;
}

void write_sensors(std::ostream& out, const std::vector<SensorRecord>& sensors) {
    out << "# x,y,value\n";
    for (const auto& s : sensors) {
        out << format_number(s.x) << ',' << format_number(s.y) << ',' << format_number(s.value) << '\n';
    }
}

std::vector<SensorRecord> read_sensor_file(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_sensors(in, path.string());
}

void write_sensor_file(const std::filesystem::path& path, const std::vector<SensorRecord>& sensors) {
    auto out = open_out(path);
    write_sensors(out, sensors);
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

std::vector<SnappedSensor> snap_sensors(const GridLayout& grid,
                                        const std::vector<SensorRecord>& records,
                                        const std::string& source) {
    const double x1 = grid.x0 + grid.dx * static_cast<double>(grid.nx - 1);
    const double y1 = grid.y0 + grid.dy * static_cast<double>(grid.ny - 1);
    const double tol_x = 1e-9 * std::max(1.0, std::abs(x1 - grid.x0));
    const double tol_y = 1e-9 * std::max(1.0, std::abs(y1 - grid.y0));

    // Nearest index along one axis; an exact half goes to the lower index.
    auto nearest = [](double t, std::size_t n) {
        const double idx = std::ceil(t - 0.5);
        return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(n - 1)));
    };

    std::vector<SnappedSensor> out;
    std::map<std::size_t, std::size_t> owner;
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        if (r.x < grid.x0 - tol_x || r.x > x1 + tol_x || r.y < grid.y0 - tol_y || r.y > y1 + tol_y) {
            throw FormatError(source + ": sensor " + std::to_string(k + 1) + " at (" +
                              format_number(r.x) + ", " + format_number(r.y) +
                              ") lies outside the field bounding box [" + format_number(grid.x0) +
                              ", " + format_number(x1) + "] x [" + format_number(grid.y0) + ", " +
                              format_number(y1) + "]");
        }
        const auto ix = nearest((r.x - grid.x0) / grid.dx, grid.nx);
        const auto iy = nearest((r.y - grid.y0) / grid.dy, grid.ny);
        const auto index = iy * grid.nx + ix;
        if (const auto [it, fresh] = owner.emplace(index, k); !fresh) {
            throw FormatError(source + ": sensors " + std::to_string(it->second + 1) + " and " +
                              std::to_string(k + 1) + " snap to the same mesh point " +
                              std::to_string(index));
        }
        const auto p = grid.position_of(index);
        out.push_back({SensorObservation{index, r.value}, r, std::hypot(r.x - p[0], r.y - p[1])});
    }
    return out;
}

} // namespace fieldcal
