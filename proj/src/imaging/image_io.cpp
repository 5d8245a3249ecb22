#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>

#include "kdi/error.hpp"
#include "kdi/imaging.hpp"
#include "kdi/keyvalue.hpp"

namespace kdi {

namespace {

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::clamp<long>(std::lround(255.0 * v), 0, 255));
}

// Interleaved RGB8 rows of the upscaled image.
std::vector<std::uint8_t> rgb8(const Image& image, std::size_t upscale) {
  require(upscale >= 1, "image export: upscale must be >= 1");
  require(image.channels() == 3, "image export: expected 3 channels");
  const std::size_t w = image.width() * upscale;
  const std::size_t h = image.height() * upscale;
  std::vector<std::uint8_t> out(w * h * 3);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        out[(y * w + x) * 3 + c] = quantize(image.at(c, y / upscale, x / upscale));
      }
    }
  }
  return out;
}

void put_u32(std::string& s, std::uint32_t v) {
  s += static_cast<char>((v >> 24) & 0xff);
  s += static_cast<char>((v >> 16) & 0xff);
  s += static_cast<char>((v >> 8) & 0xff);
  s += static_cast<char>(v & 0xff);
}

void put_chunk(std::string& png, const char type[4], const std::string& payload) {
  put_u32(png, static_cast<std::uint32_t>(payload.size()));
  std::string body(type, 4);
  body += payload;
  png += body;
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                         static_cast<uInt>(body.size()));
  put_u32(png, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::string encode_ppm(const Image& image, std::size_t upscale) {
  const auto bytes = rgb8(image, upscale);
  std::string out = "P6\n" + std::to_string(image.width() * upscale) + " " +
                    std::to_string(image.height() * upscale) + "\n255\n";
  out.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  return out;
}

std::string encode_png(const Image& image, std::size_t upscale) {
  const auto bytes = rgb8(image, upscale);
  const std::size_t w = image.width() * upscale;
  const std::size_t h = image.height() * upscale;
  std::string raw;
  raw.reserve(h * (w * 3 + 1));
  for (std::size_t y = 0; y < h; ++y) {
    raw += '\0';  // filter type None
    raw.append(reinterpret_cast<const char*>(bytes.data() + y * w * 3), w * 3);
  }
  uLongf zsize = compressBound(static_cast<uLong>(raw.size()));
  std::string z(zsize, '\0');
  if (compress2(reinterpret_cast<Bytef*>(z.data()), &zsize,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                9) != Z_OK) {
    throw IoError("png: deflate failed");
  }
  z.resize(zsize);

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(w));
  put_u32(ihdr, static_cast<std::uint32_t>(h));
  ihdr += static_cast<char>(8);  // bit depth
  ihdr += static_cast<char>(2);  // truecolour RGB
  ihdr += std::string(3, '\0');  // compression, filter, interlace
  put_chunk(png, "IHDR", ihdr);
  put_chunk(png, "IDAT", z);
  put_chunk(png, "IEND", "");
  return png;
}

void export_image(const Image& image, std::size_t upscale, const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  write_text_file(path, ext == ".png" ? encode_png(image, upscale) : encode_ppm(image, upscale));
}

Image decode_ppm(const std::string& bytes) {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  require(token() == "P6", "ppm: not a P6 file");
  const auto w = static_cast<std::size_t>(parse_int(token()));
  const auto h = static_cast<std::size_t>(parse_int(token()));
  require(parse_int(token()) == 255, "ppm: only maxval 255 supported");
  ++pos;  // single whitespace before raster
  require(bytes.size() - pos == w * h * 3, "ppm: raster size mismatch");
  Image img(3, h, w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        img.at(c, y, x) = static_cast<unsigned char>(bytes[pos + (y * w + x) * 3 + c]) / 255.0;
      }
    }
  }
  return img;
}

}  // namespace kdi
