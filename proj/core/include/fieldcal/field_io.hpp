#pragma once

#include "fieldcal/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fieldcal {

// A scalar field on a regular 2D grid.
//
// On disk:
//   # nx=<int>,ny=<int>,dx=<m>,dy=<m>,x0=<m>,y0=<m>
//   ny lines of nx comma-separated values, row-major, first line is y = y0
//
// Numbers are written locale-independently with 17 significant digits, so
// a write/read cycle reproduces every value bit for bit.
struct FieldFile {
    GridLayout grid;
    std::vector<double> values;
};

// One line of a sensor file: x,y,value. '#' lines and blank lines are skipped.
struct SensorRecord {
    double x = 0.0;
    double y = 0.0;
    double value = 0.0;
};

struct SnappedSensor {
    SensorObservation observation;
    SensorRecord record;
    double snap_distance = 0.0; // meters from the record to its mesh point
};

std::string format_number(double value);

FieldFile parse_field(std::istream& in, const std::string& source = "<stream>");
void write_field(std::ostream& out, const FieldFile& field);
FieldFile read_field_file(const std::filesystem::path& path);
void write_field_file(const std::filesystem::path& path, const FieldFile& field);

std::vector<SensorRecord> parse_sensors(std::istream& in, const std::string& source = "<stream>");
void write_sensors(std::ostream& out, const std::vector<SensorRecord>& sensors);
std::vector<SensorRecord> read_sensor_file(const std::filesystem::path& path);
void write_sensor_file(const std::filesystem::path& path, const std::vector<SensorRecord>& sensors);

/// Maps each record to its nearest grid point, ties going to the lowest
/// row-major index. Throws FormatError for records outside the grid's
/// bounding box and for two records landing on the same point.
std::vector<SnappedSensor> snap_sensors(const GridLayout& grid,
                                        const std::vector<SensorRecord>& records,
                                        const std::string& source = "<sensors>");

} // namespace fieldcal
