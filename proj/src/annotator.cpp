#include "vetl/annotator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace vetl::annotate {

namespace {

// 5x7 digits, one byte per row, low 5 bits used, MSB on the left.
constexpr std::array<std::array<std::uint8_t, 7>, 10> kDigits{{
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},
}};

int scaled(int px, double scale) { return std::max(1, static_cast<int>(std::lround(px * scale))); }

PixelRect checked(const Image& image, const Rect& css, double scale) {
  PixelRect r = to_pixels(css, scale);
  if (r.width <= 0 || r.height <= 0) throw AnnotateError(Errc::degenerate_rect, "rectangle is empty after scaling");
  if (!image.contains(r)) {
    throw AnnotateError(Errc::rect_out_of_bounds,
                        "rectangle (" + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
                            std::to_string(r.width) + "," + std::to_string(r.height) + ") lies outside the viewport");
  }
  return r;
}

// Stroke drawn outward from `inner`, clipped to the image.
void draw_frame(Image& image, const PixelRect& inner, int stroke, Color c) {
  PixelRect outer{inner.x - stroke, inner.y - stroke, inner.width + 2 * stroke, inner.height + 2 * stroke};
  image.fill_rect({outer.x, outer.y, outer.width, stroke}, c);
  image.fill_rect({outer.x, inner.bottom(), outer.width, stroke}, c);
  image.fill_rect({outer.x, inner.y, stroke, inner.height}, c);
  image.fill_rect({inner.right(), inner.y, stroke, inner.height}, c);
}

PixelRect frame_for(const PixelRect& r, int margin) {
  return {r.x - margin, r.y - margin, r.width + 2 * margin, r.height + 2 * margin};
}

PixelRect clamp_into(PixelRect r, const Image& image) {
  r.x = std::clamp(r.x, 0, std::max(0, image.width() - r.width));
  r.y = std::clamp(r.y, 0, std::max(0, image.height() - r.height));
  return r;
}

void draw_label(Image& image, const PixelRect& tag, int number, double scale, const Style& style) {
  image.fill_rect(tag, style.button_color);
  int cell = style.glyph_scale * scaled(1, scale);
  int pad = scaled(2, scale);
  int x = tag.x + pad;
  for (char ch : std::to_string(number)) {
    const auto& glyph = kDigits[ch - '0'];
    for (int row = 0; row < 7; ++row) {
      for (int col = 0; col < 5; ++col) {
        if (glyph[row] & (0x10 >> col)) {
          image.fill_rect({x + col * cell, tag.y + pad + row * cell, cell, cell}, style.label_text);
        }
      }
    }
    x += 6 * cell;
  }
}

}  // namespace

PixelRect to_pixels(const Rect& css, double scale) {
  int x0 = static_cast<int>(std::floor(css.x * scale));
  int y0 = static_cast<int>(std::floor(css.y * scale));
  int x1 = static_cast<int>(std::ceil(css.right() * scale));
  int y1 = static_cast<int>(std::ceil(css.bottom() * scale));
  return {x0, y0, x1 - x0, y1 - y0};
}

PixelRect label_size(int number, double scale, const Style& style) {
  int cell = style.glyph_scale * scaled(1, scale);
  int pad = scaled(2, scale);
  int digits = static_cast<int>(std::to_string(number).size());
  return {0, 0, 2 * pad + digits * 6 * cell - cell, 2 * pad + 7 * cell};
}

AnnotatedScreenshot annotate_input(const Image& screenshot, const Rect& widget_rect, double scale,
                                   const Style& style) {
  PixelRect widget = checked(screenshot, widget_rect, scale);
  AnnotatedScreenshot out;
  out.image = screenshot;
  out.scale = scale;
  out.widget_frame = frame_for(widget, scaled(style.margin, scale));
  draw_frame(out.image, out.widget_frame, scaled(style.stroke, scale), style.input_color);
  return out;
}

AnnotatedScreenshot annotate_elements(const Image& screenshot, const Rect& widget_rect,
                                      const std::vector<std::pair<dom::ElementKey, Rect>>& buttons, double scale,
                                      const Style& style) {
  if (buttons.empty()) throw AnnotateError(Errc::no_buttons, "element annotation needs at least one button");
  PixelRect widget = checked(screenshot, widget_rect, scale);
  std::vector<PixelRect> button_px;
  for (const auto& [key, rect] : buttons) button_px.push_back(checked(screenshot, rect, scale));

  AnnotatedScreenshot out;
  out.image = screenshot;
  out.scale = scale;
  int stroke = scaled(style.stroke, scale);
  int margin = scaled(style.margin, scale);
  for (std::size_t i = 0; i < buttons.size(); ++i) {
    PixelRect frame = frame_for(button_px[i], margin);
    draw_frame(out.image, frame, stroke, style.button_color);
    out.button_frames.push_back(frame);
    out.numbering[static_cast<int>(i) + 1] = buttons[i].first;
  }
  // labels after frames so a later frame never paints over an earlier digit
  for (std::size_t i = 0; i < buttons.size(); ++i) {
    int number = static_cast<int>(i) + 1;
    PixelRect tag = label_size(number, scale, style);
    tag.x = out.button_frames[i].x - stroke;
    tag.y = out.button_frames[i].y - stroke;
    tag = clamp_into(tag, out.image);
    for (bool moved = true; moved;) {
      moved = false;
      for (const auto& earlier : out.labels) {
        if (tag.intersects(earlier)) {
          tag.y = earlier.bottom();
          moved = true;
        }
      }
    }
    tag = clamp_into(tag, out.image);
    draw_label(out.image, tag, number, scale, style);
    out.labels.push_back(tag);
  }
  out.widget_frame = frame_for(widget, margin);
  draw_frame(out.image, out.widget_frame, stroke, style.input_color);
  return out;
}

}  // namespace vetl::annotate
