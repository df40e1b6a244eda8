#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "vetl/dom_context.hpp"
#include "vetl/raster.hpp"

namespace vetl::annotate {

enum class Errc { rect_out_of_bounds, degenerate_rect, no_buttons };

class AnnotateError : public std::runtime_error {
 public:
  AnnotateError(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

struct Style {
  Color input_color = colors::kRed;
  Color button_color = colors::kBlue;
  Color label_text = colors::kWhite;
  int stroke = 3;  // px at scale 1
  int margin = 2;
  int glyph_scale = 2;  // 5x7 digits drawn at this multiple (times scale)
};

struct AnnotatedScreenshot {
  Image image;
  std::map<int, dom::ElementKey> numbering;  // empty for input annotations
  double scale = 1.0;
  PixelRect widget_frame;                 // inner edge of the red stroke
  std::vector<PixelRect> button_frames;   // inner edges, in numbering order
  std::vector<PixelRect> labels;          // label tags, in numbering order
};

/// Device-pixel rectangle of a viewport-relative CSS rect.
PixelRect to_pixels(const Rect& css, double scale);

/// Draws the red frame. `widget_rect` is viewport-relative CSS px.
AnnotatedScreenshot annotate_input(const Image& screenshot, const Rect& widget_rect, double scale,
                                   const Style& style = {});

AnnotatedScreenshot annotate_elements(const Image& screenshot, const Rect& widget_rect,
                                      const std::vector<std::pair<dom::ElementKey, Rect>>& buttons, double scale,
                                      const Style& style = {});

/// Width and height of the label tag for `number` at `scale`.
PixelRect label_size(int number, double scale, const Style& style = {});

}  // namespace vetl::annotate
