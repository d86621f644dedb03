#include "litho/pnm.hpp"

#include <cctype>
#include <fstream>
#include <string>

#include "litho/error.hpp"

namespace litho::pnm {
namespace {

int read_header_int(std::istream& in, const std::filesystem::path& path) {
  int c = in.peek();
  while (in && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else {
      in.get();
    }
    c = in.peek();
  }
  int value = -1;
  if (!(in >> value) || value < 0) {
    throw Error(ErrorCode::CorruptManifest,
                "malformed anymap header in " + path.string());
  }
  return value;
}

struct Header {
  int width;
  int height;
};

Header read_header(std::istream& in, const char* magic,
                   const std::filesystem::path& path) {
  char m[2] = {0, 0};
  in.read(m, 2);
  if (!in || m[0] != magic[0] || m[1] != magic[1]) {
    throw Error(ErrorCode::CorruptManifest,
                std::string("expected ") + magic + " anymap: " + path.string());
  }
  Header h{};
  h.width = read_header_int(in, path);
  h.height = read_header_int(in, path);
  const int maxval = read_header_int(in, path);
  if (maxval != 255) {
    throw Error(ErrorCode::CorruptManifest,
                "only maxval 255 is supported: " + path.string());
  }
  in.get();  // single whitespace before the raster
  return h;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFrame, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  auto out = open_out(path);
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  const auto bytes = img.bytes();
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

RgbImage read_ppm(const std::filesystem::path& path) {
  auto in = open_in(path);
  const auto h = read_header(in, "P6", path);
  RgbImage img(h.width, h.height);
  auto bytes = img.bytes();
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw Error(ErrorCode::CorruptManifest, "truncated raster: " + path.string());
  }
  return img;
}

void write_mask_pgm(const std::filesystem::path& path, const StoneMask& mask) {
  auto out = open_out(path);
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  std::string row(mask.bits().size(), '\0');
  for (std::size_t i = 0; i < row.size(); ++i) {
    row[i] = mask.bits()[i] ? static_cast<char>(255) : '\0';
  }
  out.write(row.data(), static_cast<std::streamsize>(row.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

StoneMask read_mask_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  const auto h = read_header(in, "P5", path);
  StoneMask mask(h.width, h.height);
  std::string raw(mask.pixel_count(), '\0');
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw Error(ErrorCode::CorruptManifest, "truncated raster: " + path.string());
  }
  auto bits = mask.bits();
  for (std::size_t i = 0; i < raw.size(); ++i) bits[i] = raw[i] != '\0' ? 1 : 0;
  return mask;
}

}  // namespace litho::pnm
