#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "spdc/grid.hpp"

namespace spdc {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Parses the whole string or throws std::invalid_argument.
double parse_number(std::string_view text);

/// 16-bit binary PGM (P5, maxval 65535, big-endian samples), row 0 first,
/// scaled so the image maximum maps to 65535.
void write_pgm(const std::filesystem::path& path, const ImageArray& values);

/// Raw sample values of a binary PGM (8- or 16-bit). Throws IoError on
/// malformed or truncated files.
ImageArray read_pgm(const std::filesystem::path& path);

/// CSV grid: line `nx,ny,pitch_mm`, a line of those values, then ny rows of nx
/// comma-separated values (row-major, LF endings).
void write_grid_csv(const std::filesystem::path& path, const ImageArray& values, double pitch_mm);

struct CsvGrid {
  ImageArray values;
  double pitch_mm = 1.0;
};

CsvGrid read_grid_csv(const std::filesystem::path& path);

/// Loads a PGM or CSV image (by extension) as a grid centred at the origin.
/// PGM files carry no pitch, so `pgm_pitch_mm` supplies it.
IntensityGrid load_grid(const std::filesystem::path& path, double pgm_pitch_mm = 1.0);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace spdc
