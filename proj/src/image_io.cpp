#include "spdc/image_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <openssl/evp.h>

#include "spdc/errors.hpp"

namespace spdc {

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

double parse_number(std::string_view text) {
  double value = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end || text.empty())
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return value;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_pgm(const std::filesystem::path& path, const ImageArray& values) {
  const double top = values.size() ? values.maxCoeff() : 0.0;
  std::string data = "P5\n" + std::to_string(values.cols()) + " " + std::to_string(values.rows()) + "\n65535\n";
  data.reserve(data.size() + 2 * values.size());
  for (Eigen::Index j = 0; j < values.rows(); ++j) {
    for (Eigen::Index i = 0; i < values.cols(); ++i) {
      const double scaled = top > 0 ? std::max(values(j, i), 0.0) / top * 65535.0 : 0.0;
      const auto sample = static_cast<std::uint16_t>(std::lround(scaled));
      data.push_back(static_cast<char>(sample >> 8));
      data.push_back(static_cast<char>(sample & 0xff));
    }
  }
  write_text(path, data);
}

namespace {

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Next whitespace-delimited header token, skipping `#` comments.
std::string pgm_token(const std::string& data, std::size_t& pos) {
  while (pos < data.size()) {
    if (data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
  return data.substr(start, pos - start);
}

int header_int(const std::string& token, const std::filesystem::path& path) {
  int v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size() || v <= 0)
    throw IoError("malformed PGM header in " + path.string());
  return v;
}

}  // namespace

ImageArray read_pgm(const std::filesystem::path& path) {
  const std::string data = read_all(path);
  std::size_t pos = 0;
  if (pgm_token(data, pos) != "P5") throw IoError(path.string() + " is not a binary PGM (P5)");
  const int nx = header_int(pgm_token(data, pos), path);
  const int ny = header_int(pgm_token(data, pos), path);
  const int maxval = header_int(pgm_token(data, pos), path);
  if (maxval > 65535) throw IoError("PGM maxval exceeds 65535 in " + path.string());
  if (pos >= data.size()) throw IoError("truncated PGM " + path.string());
  ++pos;  // single whitespace byte before the raster

  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(nx) * ny * bytes_per;
  if (data.size() - pos < need) throw IoError("truncated PGM raster in " + path.string());

  ImageArray values(ny, nx);
  const auto* raw = reinterpret_cast<const unsigned char*>(data.data() + pos);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = (static_cast<std::size_t>(j) * nx + i) * bytes_per;
      values(j, i) = bytes_per == 2 ? (raw[k] << 8 | raw[k + 1]) : raw[k];
    }
  return values;
}

void write_grid_csv(const std::filesystem::path& path, const ImageArray& values, double pitch_mm) {
  std::string out = "nx,ny,pitch_mm\n";
  out += std::to_string(values.cols()) + "," + std::to_string(values.rows()) + "," + format_number(pitch_mm) + "\n";
  for (Eigen::Index j = 0; j < values.rows(); ++j) {
    for (Eigen::Index i = 0; i < values.cols(); ++i) {
      if (i) out += ',';
      out += format_number(values(j, i));
    }
    out += '\n';
  }
  write_text(path, out);
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto end = line.find(sep, start);
    out.push_back(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

CsvGrid read_grid_csv(const std::filesystem::path& path) {
  const std::string data = read_all(path);
  std::istringstream in(data);
  std::string line;
  if (!std::getline(in, line) || line != "nx,ny,pitch_mm") throw IoError("missing CSV grid header in " + path.string());
  if (!std::getline(in, line)) throw IoError("missing CSV grid shape in " + path.string());
  const auto shape = split(line, ',');
  if (shape.size() != 3) throw IoError("malformed CSV grid shape in " + path.string());
  CsvGrid grid;
  int nx = 0, ny = 0;
  try {
    nx = header_int(std::string(shape[0]), path);
    ny = header_int(std::string(shape[1]), path);
    grid.pitch_mm = parse_number(shape[2]);
  } catch (const std::invalid_argument&) {
    throw IoError("malformed CSV grid shape in " + path.string());
  } catch (const IoError&) {
    throw IoError("malformed CSV grid shape in " + path.string());
  }
  grid.values.resize(ny, nx);
  for (int j = 0; j < ny; ++j) {
    if (!std::getline(in, line)) throw IoError("truncated CSV grid " + path.string());
    const auto cells = split(line, ',');
    if (static_cast<int>(cells.size()) != nx) throw IoError("wrong column count in " + path.string());
    try {
      for (int i = 0; i < nx; ++i) grid.values(j, i) = parse_number(cells[i]);
    } catch (const std::invalid_argument& e) {
      throw IoError(path.string() + ": " + e.what());
    }
  }
  return grid;
}

IntensityGrid load_grid(const std::filesystem::path& path, double pgm_pitch_mm) {
  const auto ext = path.extension().string();
  if (ext == ".csv") {
    auto csv = read_grid_csv(path);
    const auto g = centered_geometry(static_cast<int>(csv.values.cols()), static_cast<int>(csv.values.rows()),
                                     csv.pitch_mm);
    return IntensityGrid(g, std::move(csv.values));
  }
  auto values = read_pgm(path);
  const auto g = centered_geometry(static_cast<int>(values.cols()), static_cast<int>(values.rows()), pgm_pitch_mm);
  return IntensityGrid(g, std::move(values));
}

std::string sha256_file(const std::filesystem::path& path) {
  const std::string data = read_all(path);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 failed for " + path.string());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int k = 0; k < len; ++k) {
    hex.push_back(kHex[digest[k] >> 4]);
    hex.push_back(kHex[digest[k] & 0xf]);
  }
  return hex;
}

}  // namespace spdc
