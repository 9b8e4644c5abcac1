// Copyright 2026 The Grit Forge Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "grit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "grit/error.hpp"

namespace grit {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void decode_error(const std::filesystem::path& path,
                               const std::string& what) {
  throw Error(ErrorCode::kDecode, path.string() + ": " + what);
}

GrayImage read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorCode::kMissingFile, path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    decode_error(path, "libpng initialisation failed");
  }

  GrayImage img;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> raw;
  volatile int channels = 1;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    decode_error(path, "corrupt PNG stream");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_PALETTE) {
    // Palette indices are kept as labels, not expanded to colours.
    if (depth < 8) {
      if (color == PNG_COLOR_TYPE_GRAY) {
        png_set_expand_gray_1_2_4_to_8(png);
      } else {
        png_set_packing(png);
      }
      depth = 8;
    }
    if (depth == 16) png_set_swap(png);
  } else {
    channels = png_get_channels(png, info);
  }
  png_read_update_info(png, info);
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  if (channels == 1) {
    const std::size_t stride = png_get_rowbytes(png, info);
    raw.resize(stride * img.height);
    rows.resize(img.height);
    for (int y = 0; y < img.height; ++y) rows[y] = raw.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                path.string() + ": expected a single-channel label image, got " +
                    std::to_string(static_cast<int>(channels)) + " channels");
  }
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  const std::size_t stride = raw.size() / std::max(img.height, 1);
  for (int y = 0; y < img.height; ++y) {
    const std::uint8_t* row = raw.data() + y * stride;
    for (int x = 0; x < img.width; ++x) {
      std::uint16_t v;
      if (depth == 16) {
        v = static_cast<std::uint16_t>(row[2 * x] | (row[2 * x + 1] << 8));
      } else {
        v = row[x];
      }
      img.pixels[static_cast<std::size_t>(y) * img.width + x] = v;
    }
  }
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::string magic;
  in >> magic;
  auto next_int = [&]() {
    int v = -1;
    while (in >> std::ws && in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
    }
    in >> v;
    return v;
  };
  GrayImage img;
  img.width = next_int();
  img.height = next_int();
  const int maxval = next_int();
  if (!in || img.width <= 0 || img.height <= 0 || maxval <= 0 ||
      maxval > 65535) {
    decode_error(path, "bad PGM header");
  }
  in.get();
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  img.pixels.resize(n);
  if (maxval < 256) {
    std::vector<std::uint8_t> buf(n);
    if (!in.read(reinterpret_cast<char*>(buf.data()), n)) {
      decode_error(path, "truncated PGM raster");
    }
    for (std::size_t i = 0; i < n; ++i) img.pixels[i] = buf[i];
  } else {
    std::vector<std::uint8_t> buf(2 * n);
    if (!in.read(reinterpret_cast<char*>(buf.data()), 2 * n)) {
      decode_error(path, "truncated PGM raster");
    }
    for (std::size_t i = 0; i < n; ++i) {
      img.pixels[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
    }
  }
  return img;
}

}  // namespace

GrayImage read_gray_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kMissingFile, "no such file: " + path.string());
  }
  std::ifstream probe(path, std::ios::binary);
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), sizeof(sig));
  const auto got = probe.gcount();
  probe.close();
  if (got == 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  if (got >= 2 && sig[0] == 'P' && sig[1] == '5') return read_pgm(path);
  decode_error(path, "unrecognised image format (expected PNG or PGM)");
}

void write_gray_png(const std::filesystem::path& path, const GrayImage& img) {
  const volatile bool wide = std::any_of(img.pixels.begin(), img.pixels.end(),
                                         [](std::uint16_t v) { return v > 255; });

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::kIo, "libpng initialisation failed");
  }
  const int bytes = wide ? 2 : 1;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * bytes);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, img.width, img.height, wide ? 16 : 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  // Fixed zlib settings keep the written bytes reproducible.
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::uint16_t v = img.at(x, y);
      if (wide) {
        row[2 * x] = static_cast<std::uint8_t>(v >> 8);
        row[2 * x + 1] = static_cast<std::uint8_t>(v & 0xff);
      } else {
        row[x] = static_cast<std::uint8_t>(v);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace grit
