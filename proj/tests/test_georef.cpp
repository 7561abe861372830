#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "quarry/csv.hpp"
#include "quarry/error.hpp"
#include "quarry/georef.hpp"
#include "quarry/pdf.hpp"
#include "synthetic_map.hpp"

using namespace quarry;
using quarry::testing::PdfBuilder;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

// Textbook normal-equation solution, kept apart from the library's solver.
struct Line {
  double slope, intercept;
};
Line closed_form(const std::vector<std::pair<double, double>>& pts) {
  double n = static_cast<double>(pts.size()), sp = 0, sd = 0, spp = 0, spd = 0;
  for (auto [p, d] : pts) {
    sp += p;
    sd += d;
    spp += p * p;
    spd += p * d;
  }
  double slope = (n * spd - sp * sd) / (n * spp - sp * sp);
  return {slope, (sd - slope * sp) / n};
}

AxisTick lon(double px, double deg) { return {GeoAxis::longitude, px, deg, ""}; }
AxisTick lat(double px, double deg) { return {GeoAxis::latitude, px, deg, ""}; }

const Region kRegion{0, {0, 0, 600, 300}, RegionSource::user_drawn};

PageContent page_of(const PdfBuilder& b) { return pages_from_pdf(pdf::parse(b.build())).at(0); }

}  // namespace

TEST(Label, Grammar) {
  auto a = parse_coordinate_label("40°N");
  EXPECT_EQ(a.axis, GeoAxis::latitude);
  EXPECT_DOUBLE_EQ(a.degrees, 40.0);
  auto b = parse_coordinate_label("120.5°W");
  EXPECT_EQ(b.axis, GeoAxis::longitude);
  EXPECT_DOUBLE_EQ(b.degrees, -120.5);
  EXPECT_EQ(code_of([] { parse_coordinate_label("42"); }), ErrorCode::UnparsableLabel);
}

TEST(Label, Variants) {
  EXPECT_DOUBLE_EQ(parse_coordinate_label("40°30′N").degrees, 40.5);
  EXPECT_DOUBLE_EQ(parse_coordinate_label("40°30'15\"S").degrees, -(40 + 30 / 60.0 + 15 / 3600.0));
  EXPECT_DOUBLE_EQ(parse_coordinate_label(" 12 º e ").degrees, 12);
  EXPECT_DOUBLE_EQ(parse_coordinate_label("+7E").degrees, 7);
  EXPECT_DOUBLE_EQ(parse_coordinate_label("-7E").degrees, -7);
  for (const char* bad : {"Figure 3", "", "N", "95°N", "181°E", "40°N extra", "40°75′N", "E40"})
    EXPECT_EQ(code_of([&] { parse_coordinate_label(bad); }), ErrorCode::UnparsableLabel) << bad;
}

TEST(Label, FormatRoundTrip) {
  for (int d = 0; d <= 180; ++d)
    for (char h : std::string("NSEW")) {
      bool latitude = h == 'N' || h == 'S';
      if (latitude && d > 90) continue;
      std::string text = std::to_string(d) + "°" + h;
      auto parsed = parse_coordinate_label(text);
      EXPECT_EQ(parsed.axis, latitude ? GeoAxis::latitude : GeoAxis::longitude);
      if (d != 0) EXPECT_EQ(format_coordinate(parsed.degrees, parsed.axis), text);
      EXPECT_EQ(parse_coordinate_label(format_coordinate(parsed.degrees, parsed.axis)).degrees, parsed.degrees);
    }
}

TEST(Ticks, BottomLongitudeLabels) {
  PdfBuilder b;
  b.page().rect(100, 200, 400, 300).text(180, 185, 8, "80°E").text(400, 185, 8, "120°E").text(300, 188, 8, "Figure 3");
  auto ticks = detect_ticks(page_of(b), {0, {100, 200, 500, 500}, RegionSource::user_drawn});
  ASSERT_EQ(ticks.size(), 2u);
  for (const auto& t : ticks) EXPECT_EQ(t.axis, GeoAxis::longitude);
  EXPECT_DOUBLE_EQ(ticks[0].degrees, 80);
  EXPECT_NEAR(ticks[0].pixel, 180 + 0.5 * PdfBuilder::text_width("80°E", 8), 1e-3);
  EXPECT_DOUBLE_EQ(ticks[1].degrees, 120);
}

TEST(Ticks, EmptyMarginsAndWrongAxisBands) {
  PdfBuilder b;
  b.page().text(300, 400, 8, "40°N");  // inside the frame
  Region r{0, {100, 200, 500, 500}, RegionSource::user_drawn};
  EXPECT_TRUE(detect_ticks(page_of(b), r).empty());
  PdfBuilder c;
  c.page().text(300, 185, 8, "40°N");  // latitude label in a longitude band
  EXPECT_TRUE(detect_ticks(page_of(c), r).empty());
}

TEST(Calibrate, MidpointLongitudeAndLatitude) {
  auto cal = calibrate(kRegion, {lon(100, 80), lon(500, 120), lat(50, 40), lat(250, 20)});
  EXPECT_NEAR(locate_point(cal, 300, 150).longitude, 100, 1e-9);
  EXPECT_NEAR(locate_point(cal, 300, 150).latitude, 30, 1e-9);
  EXPECT_NEAR(cal.rms_lon_deg, 0, 1e-12);
}

TEST(Calibrate, ThreeCollinearTicks) {
  auto cal = calibrate(kRegion, {lon(0, 0), lon(100, 10), lon(200, 20), lat(0, 0), lat(10, 1)});
  EXPECT_NEAR(cal.lon_map.slope, 0.1, 1e-12);
  EXPECT_NEAR(cal.rms_lon_deg, 0, 1e-12);
}

TEST(Calibrate, MatchesClosedFormWithResidual) {
  std::vector<std::pair<double, double>> pts = {{10, 1.0}, {90, 9.5}, {200, 19.0}, {330, 33.7}};
  std::vector<AxisTick> ticks = {lat(0, 0), lat(1, 1)};
  for (auto [p, d] : pts) ticks.push_back(lon(p, d));
  auto cal = calibrate(kRegion, ticks);
  auto want = closed_form(pts);
  EXPECT_NEAR(cal.lon_map.slope, want.slope, 1e-12);
  EXPECT_NEAR(cal.lon_map.intercept, want.intercept, 1e-10);
  double sq = 0;
  for (auto [p, d] : pts) sq += std::pow(want.slope * p + want.intercept - d, 2);
  EXPECT_NEAR(cal.rms_lon_deg, std::sqrt(sq / 4), 1e-10);
  EXPECT_GT(cal.rms_lon_deg, 0);
}

TEST(Calibrate, Errors) {
  EXPECT_EQ(code_of([] { calibrate(kRegion, {lon(0, 0), lat(0, 0), lat(5, 1)}); }), ErrorCode::InsufficientTicks);
  EXPECT_EQ(code_of([] { calibrate(kRegion, {lon(0, 0), lon(1, 1), lat(5, 0)}); }), ErrorCode::InsufficientTicks);
  EXPECT_EQ(code_of([] { calibrate(kRegion, {lon(7, 0), lon(7, 1), lat(0, 0), lat(5, 1)}); }),
            ErrorCode::DegenerateTicks);
  EXPECT_EQ(code_of([] { calibrate(kRegion, {lon(0, 3), lon(9, 3), lat(0, 0), lat(5, 1)}); }),
            ErrorCode::DegenerateTicks);
}

TEST(Locate, TickPixelAndCornerAndOutside) {
  auto cal = calibrate(kRegion, {lon(100, 80), lon(500, 120), lat(50, 40), lat(250, 20)});
  EXPECT_NEAR(locate_point(cal, 100, 50).longitude, 80, 1e-9);
  EXPECT_NEAR(locate_point(cal, 500, 250).latitude, 20, 1e-9);
  auto corner = locate_point(cal, 600, 300);
  auto lonf = closed_form({{100, 80}, {500, 120}});
  auto latf = closed_form({{50, 40}, {250, 20}});
  EXPECT_NEAR(corner.longitude, lonf.slope * 600 + lonf.intercept, 1e-9);
  EXPECT_NEAR(corner.latitude, latf.slope * 300 + latf.intercept, 1e-9);
  EXPECT_EQ(code_of([&] { locate_point(cal, 601, 10); }), ErrorCode::PixelOutsideRegion);
}

TEST(Locate, ClampsAndFlags) {
  auto cal = calibrate(kRegion, {lon(0, 170), lon(100, 180), lat(0, 80), lat(100, 90)});
  auto p = locate_point(cal, 300, 200);
  EXPECT_EQ(p.longitude, 180);
  EXPECT_EQ(p.latitude, 90);
  EXPECT_TRUE(p.out_of_range);
  EXPECT_FALSE(locate_point(cal, 50, 50).out_of_range);
}

TEST(GeoCsv, ColumnsAndJson) {
  GeoPoint p;
  p.longitude = -120.5;
  p.latitude = 40;
  p.pixel_x = 10;
  p.pixel_y = 20.25;
  p.created_by = "u1";
  p.created_at = Timestamp{std::chrono::milliseconds{0}};
  auto rows = csv::parse(geo_points_csv({p}));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"longitude", "latitude", "pixel_x", "pixel_y", "created_by", "created_at"}));
  EXPECT_EQ(rows[1], (std::vector<std::string>{"-120.5", "40", "10", "20.25", "u1", "1970-01-01T00:00:00.000Z"}));
  EXPECT_EQ(nlohmann::json(p).get<GeoPoint>(), p);
}

TEST(GeoProperty, TwoTickInterpolationIsExact) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    double x1 = 600 * u(rng), x2 = 600 * u(rng), d1 = -180 + 360 * u(rng), d2 = -180 + 360 * u(rng);
    if (std::abs(x1 - x2) < 1 || d1 == d2) continue;
    auto cal = calibrate(kRegion, {lon(x1, d1), lon(x2, d2), lat(0, 0), lat(300, 10)});
    double x = 600 * u(rng);
    double lerp = d1 + (x - x1) / (x2 - x1) * (d2 - d1);
    double got = cal.lon_map(x);
    if (std::abs(lerp) <= 180) EXPECT_NEAR(locate_point(cal, x, 1).longitude, lerp, 1e-9);
    EXPECT_NEAR(got, lerp, 1e-9);
  }
}

TEST(GeoProperty, TranslationInvariance) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<AxisTick> ticks = {lat(0, 0), lat(100, 5)};
    for (int k = 0; k < 5; ++k) ticks.push_back(lon(500 * u(rng), 30 * u(rng)));
    auto base = calibrate(kRegion, ticks);
    double shift = -200 + 400 * u(rng);
    auto moved_ticks = ticks;
    for (auto& t : moved_ticks)
      if (t.axis == GeoAxis::longitude) t.pixel += shift;
    auto moved = calibrate(kRegion, moved_ticks);
    EXPECT_NEAR(moved.rms_lon_deg, base.rms_lon_deg, 1e-9);
    double q = 500 * u(rng);
    EXPECT_NEAR(moved.lon_map(q + shift), base.lon_map(q), 1e-8);
  }
}

TEST(GeoProperty, SyntheticMapsRecoverCoordinates) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 25; ++trial) {
    PdfBuilder b;
    b.page();
    auto m = quarry::testing::draw_map(b, rng, 2 + rng() % 4, 2 + rng() % 4);
    auto page = page_of(b);
    Region r{0, {m.frame.x0, m.frame.y0, m.frame.x1, m.frame.y1}, RegionSource::user_drawn};
    auto ticks = detect_ticks(page, r);
    ASSERT_EQ(ticks.size(), m.ticks.size());
    auto cal = calibrate(r, ticks);
    for (int q = 0; q < 20; ++q) {
      double x = m.frame.x0 + u(rng) * (m.frame.x1 - m.frame.x0);
      double y = m.frame.y0 + u(rng) * (m.frame.y1 - m.frame.y0);
      auto p = locate_point(cal, x, y);
      EXPECT_LT(std::abs(p.longitude - m.lon_at(x)), 1e-3 * m.lon_span);
      EXPECT_LT(std::abs(p.latitude - m.lat_at(y)), 1e-3 * m.lat_span);
    }
  }
}
