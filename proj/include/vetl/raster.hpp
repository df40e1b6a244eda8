#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vetl {

/// Axis-aligned rectangle in CSS pixels.
struct Rect {
  double x = 0, y = 0, width = 0, height = 0;

  double right() const { return x + width; }
  double bottom() const { return y + height; }
  bool operator==(const Rect&) const = default;
};

struct PixelRect {
  int x = 0, y = 0, width = 0, height = 0;

  int right() const { return x + width; }
  int bottom() const { return y + height; }
  bool intersects(const PixelRect& o) const {
    return x < o.right() && o.x < right() && y < o.bottom() && o.y < bottom();
  }
  bool operator==(const PixelRect&) const = default;
};

struct Color {
  std::uint8_t r = 0, g = 0, b = 0, a = 255;
  bool operator==(const Color&) const = default;
};

namespace colors {
inline constexpr Color kRed{255, 0, 0, 255};
inline constexpr Color kBlue{0, 0, 255, 255};
inline constexpr Color kWhite{255, 255, 255, 255};
}  // namespace colors

/// 8-bit RGBA raster, row-major, no padding.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Color fill = colors::kWhite);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  Color at(int x, int y) const;
  void set(int x, int y, Color c);
  void fill_rect(const PixelRect& r, Color c);  // clipped to bounds
  bool contains(const PixelRect& r) const {
    return r.x >= 0 && r.y >= 0 && r.right() <= width_ && r.bottom() <= height_;
  }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(std::span<const std::uint8_t> bytes);

void save_png(const Image& image, const std::string& path);

}  // namespace vetl
