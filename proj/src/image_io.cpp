#include "localseg/image_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace localseg {
namespace {

cv::Mat decode(std::span<const std::uint8_t> bytes, int flags) {
  if (bytes.empty()) throw DecodeError("empty image payload");
  const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8U, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat out;
  try {
    out = cv::imdecode(buf, flags);
  } catch (const cv::Exception& e) {
    throw DecodeError(std::string("cannot decode image: ") + e.what());
  }
  if (out.empty()) throw DecodeError("cannot decode image (expected PNG or JPEG)");
  if (out.depth() != CV_8U) out.convertTo(out, CV_8U, 1.0 / 257.0);
  return out;
}

Bytes encode_png(const cv::Mat& m) {
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", m, out)) throw Error("PNG encoding failed");
  return out;
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
  const cv::Mat bgr = decode(bytes, cv::IMREAD_COLOR);
  Image img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* src = bgr.ptr<cv::Vec3b>(y);
    auto row = img.row(y);
    for (int x = 0; x < bgr.cols; ++x) row[x] = {src[x][2], src[x][1], src[x][0]};
  }
  return img;
}

Image read_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

BinaryMask decode_mask(std::span<const std::uint8_t> bytes) {
  const cv::Mat gray = decode(bytes, cv::IMREAD_GRAYSCALE);
  BinaryMask m(gray.cols, gray.rows);
  for (int y = 0; y < gray.rows; ++y) {
    const auto* src = gray.ptr<std::uint8_t>(y);
    auto row = m.row(y);
    for (int x = 0; x < gray.cols; ++x) row[x] = src[x] >= 128 ? 1 : 0;
  }
  return m;
}

BinaryMask read_mask(const std::filesystem::path& path) { return decode_mask(read_file(path)); }

Bytes encode_mask_png(const BinaryMask& m) {
  cv::Mat gray(m.height(), m.width(), CV_8U);
  for (int y = 0; y < m.height(); ++y) {
    auto row = m.row(y);
    auto* dst = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.width(); ++x) dst[x] = row[x] ? 255 : 0;
  }
  return encode_png(gray);
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& m) {
  write_file(path, encode_mask_png(m));
}

Bytes encode_image_png(const Image& img) {
  cv::Mat bgr(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto row = img.row(y);
    auto* dst = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x) dst[x] = {row[x][2], row[x][1], row[x][0]};
  }
  return encode_png(bgr);
}

void write_image_png(const std::filesystem::path& path, const Image& img) {
  write_file(path, encode_image_png(img));
}

Bytes encode_scalar_blob(const ScalarMap& m) {
  Bytes out;
  out.reserve(8 + m.pixel_count() * 4);
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put32(static_cast<std::uint32_t>(m.width()));
  put32(static_cast<std::uint32_t>(m.height()));
  for (float f : m.values()) put32(std::bit_cast<std::uint32_t>(f));
  return out;
}

ScalarMap decode_scalar_blob(std::span<const std::uint8_t> bytes) {
  auto get32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[at + i]} << (8 * i);
    return v;
  };
  if (bytes.size() < 8) throw DecodeError("scalar blob: truncated header");
  const auto w = get32(0);
  const auto h = get32(4);
  if (w == 0 || h == 0 || bytes.size() != 8 + std::size_t{w} * h * 4) {
    throw DecodeError("scalar blob: size does not match header " + std::to_string(w) + "x" + std::to_string(h));
  }
  ScalarMap m(static_cast<int>(w), static_cast<int>(h));
  auto v = m.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::bit_cast<float>(get32(8 + 4 * i));
  return m;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace localseg
