#pragma once

#include <stdexcept>
#include <string>

#include "thermohand/grid.hpp"

namespace thermohand {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 8-bit single-channel PNG. Values are written as-is; binary masks use 0/255.
void write_gray8_png(const std::string& path, const Grid<std::uint8_t>& img);
Grid<std::uint8_t> read_gray8(const std::string& path);

/// Binary mask convenience: {0,1} image <-> 0/255 PNG.
void write_mask_png(const std::string& path, const BinaryImage& mask);
BinaryImage read_mask_png(const std::string& path);

/// 16-bit single-channel frames (PNG or TIFF, chosen by file extension).
void write_gray16(const std::string& path, const GrayImage16& img);
GrayImage16 read_gray16(const std::string& path);

}  // namespace thermohand
