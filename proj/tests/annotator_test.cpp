#include <gtest/gtest.h>

#include "vetl/annotator.hpp"

using namespace vetl;
using namespace vetl::annotate;

namespace {
const Color kGrey{200, 200, 200, 255};

Image canvas(int w = 400, int h = 300) { return Image(w, h, kGrey); }
dom::ElementKey key(int i) { return {"button:" + std::to_string(i)}; }
}  // namespace

TEST(Annotator, RedFrameStrokeOnly) {
  auto out = annotate_input(canvas(), {100, 50, 200, 30}, 1.0);
  EXPECT_EQ(out.image.width(), 400);
  EXPECT_EQ(out.image.height(), 300);
  EXPECT_TRUE(out.numbering.empty());
  // inner edge sits 2 px outside the widget, stroke 3 px beyond that
  EXPECT_EQ(out.widget_frame, (PixelRect{98, 48, 204, 34}));
  for (int x = 95; x < 305; ++x) {
    EXPECT_EQ(out.image.at(x, 45), colors::kRed) << x;
    EXPECT_EQ(out.image.at(x, 47), colors::kRed) << x;
    EXPECT_EQ(out.image.at(x, 84), colors::kRed) << x;
  }
  for (int y = 45; y < 85; ++y) {
    EXPECT_EQ(out.image.at(95, y), colors::kRed) << y;
    EXPECT_EQ(out.image.at(304, y), colors::kRed) << y;
  }
  EXPECT_EQ(out.image.at(200, 65), kGrey);
  EXPECT_EQ(out.image.at(98, 48), kGrey);
  EXPECT_EQ(out.image.at(94, 44), kGrey);
}

TEST(Annotator, ScaleDoublesCoordinates) {
  auto out = annotate_input(canvas(800, 600), {100, 50, 200, 30}, 2.0);
  EXPECT_EQ(out.widget_frame, (PixelRect{196, 96, 408, 68}));
  EXPECT_EQ(out.image.at(190, 90), colors::kRed);
  EXPECT_EQ(out.image.at(195, 95), colors::kRed);
  EXPECT_EQ(out.image.at(196, 96), kGrey);
  EXPECT_EQ(out.image.at(400, 130), kGrey);
}

TEST(Annotator, OutOfViewportRaises) {
  try {
    annotate_input(canvas(), {100, 290, 200, 30}, 1.0);
    FAIL();
  } catch (const AnnotateError& e) {
    EXPECT_EQ(e.code(), Errc::rect_out_of_bounds);
  }
  EXPECT_THROW(annotate_input(canvas(), {-5, 10, 20, 20}, 1.0), AnnotateError);
  try {
    annotate_input(canvas(), {10, 10, 0, 20}, 1.0);
    FAIL();
  } catch (const AnnotateError& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_rect);
  }
}

TEST(Annotator, FrameClampedAtImageEdge) {
  auto out = annotate_input(canvas(), {0, 0, 50, 20}, 1.0);
  EXPECT_EQ(out.image.at(52, 10), colors::kRed);
  EXPECT_EQ(out.image.at(25, 10), kGrey);
}

TEST(Annotator, FiveButtonsNumbered) {
  std::vector<std::pair<dom::ElementKey, Rect>> buttons;
  for (int i = 0; i < 5; ++i) buttons.push_back({key(i), Rect{20.0 + 75 * i, 200, 60, 28}});
  auto out = annotate_elements(canvas(), {100, 50, 200, 30}, buttons, 1.0);
  ASSERT_EQ(out.numbering.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(out.numbering.at(i + 1), key(i));
  for (int i = 0; i < 5; ++i) {
    const auto& f = out.button_frames[i];
    int mid = f.x + f.width - 4;
    EXPECT_EQ(out.image.at(mid, f.bottom()), colors::kBlue);
    EXPECT_EQ(out.image.at(f.right() + 2, f.y + f.height / 2), colors::kBlue);
  }
  EXPECT_EQ(out.image.at(200, 47), colors::kRed);
  EXPECT_EQ(out.image.at(200, 65), kGrey);
}

TEST(Annotator, LabelsCarryWhiteDigits) {
  auto out = annotate_elements(canvas(), {100, 50, 100, 20}, {{key(0), Rect{100, 150, 80, 40}}}, 1.0);
  ASSERT_EQ(out.labels.size(), 1u);
  const auto& tag = out.labels[0];
  int white = 0, blue = 0;
  for (int y = tag.y; y < tag.bottom(); ++y) {
    for (int x = tag.x; x < tag.right(); ++x) {
      Color c = out.image.at(x, y);
      white += c == colors::kWhite;
      blue += c == colors::kBlue;
    }
  }
  EXPECT_GT(white, 0);
  EXPECT_EQ(white + blue, tag.width * tag.height);
}

TEST(Annotator, OverlappingLabelsShiftDown) {
  auto out = annotate_elements(canvas(), {10, 10, 50, 20},
                               {{key(0), Rect{100, 100, 80, 40}}, {key(1), Rect{102, 102, 80, 40}}}, 1.0);
  ASSERT_EQ(out.labels.size(), 2u);
  EXPECT_FALSE(out.labels[0].intersects(out.labels[1]));
  EXPECT_GE(out.labels[1].y, out.labels[0].bottom());
  // the first label is still intact
  EXPECT_EQ(out.image.at(out.labels[0].x, out.labels[0].y), colors::kBlue);
}

TEST(Annotator, ButtonsRequired) {
  EXPECT_THROW(annotate_elements(canvas(), {10, 10, 50, 20}, {}, 1.0), AnnotateError);
  EXPECT_THROW(annotate_elements(canvas(), {10, 10, 50, 20}, {{key(0), Rect{390, 10, 40, 20}}}, 1.0),
               AnnotateError);
}

TEST(Annotator, InputImageUntouched) {
  Image src = canvas();
  Image copy = src;
  annotate_input(src, {100, 50, 200, 30}, 1.0);
  EXPECT_EQ(src, copy);
}
