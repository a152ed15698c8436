#include "membrane/mask_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <png.h>

#include "membrane/keyvalue.hpp"

namespace membrane {
namespace {

/// Next whitespace-delimited token in a PGM header, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      while ((c = in.get()) != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
      }
      return tok;
    }
  }
  throw std::runtime_error("unexpected end of PGM header");
}

int pgm_int(std::istream& in, const char* what) {
  const std::string tok = pgm_token(in);
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("bad PGM ") + what + ": '" + tok + "'");
  }
}

PoreMask read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") {
    throw std::runtime_error(path.string() + ": not a PGM file (magic '" + magic +
                             "')");
  }
  PoreMask mask;
  mask.width = pgm_int(in, "width");
  mask.height = pgm_int(in, "height");
  const int maxval = pgm_int(in, "maxval");
  if (mask.width <= 0 || mask.height <= 0 || maxval <= 0 || maxval > 255) {
    throw std::runtime_error(path.string() + ": unsupported PGM geometry");
  }
  const std::size_t n =
      static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height);
  mask.bits.resize(n);
  if (magic == "P5") {
    std::vector<unsigned char> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
      throw std::runtime_error(path.string() + ": truncated PGM raster");
    }
    for (std::size_t i = 0; i < n; ++i) {
      mask.bits[i] = raw[i] > 127 ? 1 : 0;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      mask.bits[i] = pgm_int(in, "pixel") > 127 ? 1 : 0;
    }
  }
  return mask;
}

PoreMask read_png(const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (fp == nullptr) {
    throw std::runtime_error("cannot open " + path.string());
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (info == nullptr) {
    if (png != nullptr) {
      png_destroy_read_struct(&png, nullptr, nullptr);
    }
    std::fclose(fp);
    throw std::runtime_error("libpng initialization failed");
  }
  std::vector<png_bytep> rows;
  std::vector<unsigned char> pixels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw std::runtime_error(path.string() + ": PNG decode failed");
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
  }
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (depth == 16) {
    png_set_strip_16(png);
  }
  if ((color & PNG_COLOR_MASK_ALPHA) != 0) {
    png_set_strip_alpha(png);
  }
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);

  pixels.resize(static_cast<std::size_t>(w) * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) {
    rows[y] = pixels.data() + static_cast<std::size_t>(y) * w;
  }
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  PoreMask mask;
  mask.width = static_cast<int>(w);
  mask.height = static_cast<int>(h);
  mask.bits.resize(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    mask.bits[i] = pixels[i] > 127 ? 1 : 0;
  }
  return mask;
}

}  // namespace

MaskMeta parse_mask_meta_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  MaskMeta meta;
  bool have_scale = false;
  for (const auto& [key, value] : parse_key_values(in)) {
    if (key == "scale_nm_per_px") {
      meta.scale_nm_per_px = std::stod(value);
      have_scale = true;
    } else if (key == "replicate_id") {
      meta.replicate_id = value;
    } else if (key == "sample_id") {
      meta.sample_id = value;
    } else {
      throw std::runtime_error(path.string() + ": unknown mask metadata key: " + key);
    }
  }
  if (!have_scale || !(meta.scale_nm_per_px > 0)) {
    throw std::runtime_error(path.string() + ": missing or non-positive scale_nm_per_px");
  }
  return meta;
}

void write_mask_meta_file(const MaskMeta& meta, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", meta.scale_nm_per_px);
  out << "scale_nm_per_px = " << buf << '\n';
  if (!meta.replicate_id.empty()) {
    out << "replicate_id = " << meta.replicate_id << '\n';
  }
  if (!meta.sample_id.empty()) {
    out << "sample_id = " << meta.sample_id << '\n';
  }
}

PoreMask read_mask(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) {
    throw std::runtime_error("cannot open " + path.string());
  }
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();
  if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) {
    return read_pgm(path);
  }
  if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') {
    return read_png(path);
  }
  throw std::runtime_error(path.string() + ": unrecognized image format (PGM or PNG expected)");
}

PoreMask read_mask_with_meta(const std::filesystem::path& path) {
  PoreMask mask = read_mask(path);
  std::filesystem::path meta_path = path;
  meta_path.replace_extension(".meta");
  const MaskMeta meta = parse_mask_meta_file(meta_path);
  mask.scale_nm_per_px = meta.scale_nm_per_px;
  mask.replicate_id =
      meta.replicate_id.empty() ? path.stem().string() : meta.replicate_id;
  return mask;
}

void write_mask_pgm(const PoreMask& mask, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "P5\n" << mask.width << ' ' << mask.height << "\n255\n";
  std::vector<unsigned char> raw(mask.bits.size());
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    raw[i] = mask.bits[i] != 0 ? 255 : 0;
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
}

}  // namespace membrane
