#include "latentforge/ppm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

namespace latentforge {

namespace {

// Skips PPM whitespace and '#' comments, then reads one unsigned integer.
int read_header_int(std::istream& in) {
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (!std::isspace(ch)) {
      break;
    }
    ch = in.get();
  }
  if (ch == EOF || !std::isdigit(ch))
    throw std::runtime_error("read_ppm: malformed header");
  long value = 0;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    if (value > 1'000'000'000) throw std::runtime_error("read_ppm: header value out of range");
    ch = in.get();
  }
  if (ch != EOF) in.unget();
  return static_cast<int>(value);
}

}  // namespace

void write_ppm(const ImageGrid& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::string body;
  body.reserve(image.pixels().size());
  for (double v : image.pixels()) {
    double q = std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
    body.push_back(static_cast<char>(static_cast<std::uint8_t>(q)));
  }
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ImageGrid read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '6') throw std::runtime_error("read_ppm: not a P6 file");
  int width = read_header_int(in);
  int height = read_header_int(in);
  int maxval = read_header_int(in);
  if (width <= 0 || height <= 0)
    throw std::runtime_error("read_ppm: bad dimensions");
  if (maxval != 255) throw std::runtime_error("read_ppm: maxval must be 255");
  in.get();  // single whitespace byte after maxval
  ImageGrid image(height, width);
  std::vector<char> body(image.pixels().size());
  in.read(body.data(), static_cast<std::streamsize>(body.size()));
  if (in.gcount() != static_cast<std::streamsize>(body.size()))
    throw std::runtime_error("read_ppm: truncated pixel data");
  auto px = image.pixels();
  for (std::size_t i = 0; i < px.size(); ++i)
    px[i] = static_cast<std::uint8_t>(body[i]) / 255.0;
  return image;
}

}  // namespace latentforge
