#pragma once

#include <filesystem>
#include <string>

#include "stitchkit/types.hpp"

namespace stitchkit {

// Middlebury .flo: float magic 202021.25, int32 width, int32 height, then
// row-major interleaved float32 (u, v). Little-endian throughout.
void write_flo(const std::filesystem::path& path, const WarpField& warp);
WarpField read_flo(const std::filesystem::path& path);

// Grayscale PFM ("Pf"), scale -1.0 (little-endian), rows bottom-to-top.
void write_pfm(const std::filesystem::path& path, const DepthMap& depth);
DepthMap read_pfm(const std::filesystem::path& path);

// 8-bit PNGs. Float images are clamped to [0,1] and quantized with
// round-half-up; masks map 1 -> 255.
void write_png_rgb(const std::filesystem::path& path, const Image& image);
Image read_png_rgb(const std::filesystem::path& path);
void write_png_mask(const std::filesystem::path& path, const Mask& mask);
Mask read_png_mask(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace stitchkit
