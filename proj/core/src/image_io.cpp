#include "thermohand/image_io.hpp"

#include <cstring>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace thermohand {

namespace {

cv::Mat load_unchanged(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (m.empty()) throw ImageIoError("cannot read image: " + path);
  if (m.channels() != 1) throw ImageIoError("expected single-channel image: " + path);
  return m;
}

void save(const std::string& path, const cv::Mat& m) {
  if (!cv::imwrite(path, m)) throw ImageIoError("cannot write image: " + path);
}

}  // namespace

void write_gray8_png(const std::string& path, const Grid<std::uint8_t>& img) {
  cv::Mat m(img.height, img.width, CV_8UC1);
  for (int y = 0; y < img.height; ++y)
    std::memcpy(m.ptr(y), img.data.data() + static_cast<size_t>(y) * img.width, img.width);
  save(path, m);
}

Grid<std::uint8_t> read_gray8(const std::string& path) {
  cv::Mat m = load_unchanged(path);
  if (m.depth() != CV_8U) throw ImageIoError("expected 8-bit image: " + path);
  Grid<std::uint8_t> img(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y)
    std::memcpy(img.data.data() + static_cast<size_t>(y) * m.cols, m.ptr(y), m.cols);
  return img;
}

void write_mask_png(const std::string& path, const BinaryImage& mask) {
  Grid<std::uint8_t> img(mask.width, mask.height);
  for (size_t i = 0; i < mask.data.size(); ++i) img.data[i] = mask.data[i] ? 255 : 0;
  write_gray8_png(path, img);
}

BinaryImage read_mask_png(const std::string& path) {
  Grid<std::uint8_t> img = read_gray8(path);
  BinaryImage mask(img.width, img.height);
  for (size_t i = 0; i < img.data.size(); ++i) mask.data[i] = img.data[i] >= 128 ? 1 : 0;
  return mask;
}

void write_gray16(const std::string& path, const GrayImage16& img) {
  cv::Mat m(img.height, img.width, CV_16UC1);
  for (int y = 0; y < img.height; ++y)
    std::memcpy(m.ptr(y), img.data.data() + static_cast<size_t>(y) * img.width,
                static_cast<size_t>(img.width) * 2);
  save(path, m);
}

GrayImage16 read_gray16(const std::string& path) {
  cv::Mat m = load_unchanged(path);
  cv::Mat m16;
  if (m.depth() == CV_16U) {
    m16 = m;
  } else if (m.depth() == CV_8U) {
    m.convertTo(m16, CV_16U);  // accept 8-bit inputs, widened without scaling
  } else {
    throw ImageIoError("expected 8- or 16-bit image: " + path);
  }
  GrayImage16 img(m16.cols, m16.rows);
  for (int y = 0; y < m16.rows; ++y)
    std::memcpy(img.data.data() + static_cast<size_t>(y) * m16.cols, m16.ptr(y),
                static_cast<size_t>(m16.cols) * 2);
  return img;
}

}  // namespace thermohand
