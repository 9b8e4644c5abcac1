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

#ifndef GRIT_IMAGE_IO_HPP_
#define GRIT_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace grit {

// Single-channel raster, row-major. Values fit in 16 bits.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;

  std::uint16_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
};

// Reads an 8- or 16-bit grayscale PNG or a binary PGM (P5). Throws
// Error{kMissingFile} when absent, Error{kDecode} when the bytes are not a
// supported image and Error{kDimensionMismatch} for multi-channel input.
GrayImage read_gray_image(const std::filesystem::path& path);

// Writes a grayscale PNG, 8-bit when every value fits, 16-bit otherwise.
void write_gray_png(const std::filesystem::path& path, const GrayImage& img);

}  // namespace grit

#endif  // GRIT_IMAGE_IO_HPP_
