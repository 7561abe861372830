#include "quarry/georef.hpp"

#include <charconv>
#include <cmath>

#include <Eigen/Dense>

#include "quarry/csv.hpp"
#include "quarry/error.hpp"
#include "quarry/text.hpp"

namespace quarry {

namespace {

[[noreturn]] void unparsable(std::string_view text, const std::string& why) {
  throw Error(ErrorCode::UnparsableLabel, "cannot read '" + std::string(text) + "' as a coordinate: " + why,
              {{"label", std::string(text)}});
}

struct Cursor {
  std::u32string s;
  std::size_t i = 0;

  void skip_space() {
    while (i < s.size() && text::is_space(s[i])) ++i;
  }
  bool at_end() const { return i >= s.size(); }
  char32_t peek() const { return at_end() ? 0 : s[i]; }
  bool take(std::u32string_view options) {
    if (!at_end() && options.find(s[i]) != std::u32string_view::npos) {
      ++i;
      return true;
    }
    return false;
  }
  std::optional<double> number() {
    std::string digits;
    bool dot = false, any = false;
    std::size_t j = i;
    for (; j < s.size(); ++j) {
      if (s[j] >= U'0' && s[j] <= U'9') {
        any = true;
      } else if (s[j] == U'.' && !dot) {
        dot = true;
      } else {
        break;
      }
      digits.push_back(static_cast<char>(s[j]));
    }
    if (!any) return std::nullopt;
    double v = 0;
    auto res = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (res.ec != std::errc()) return std::nullopt;
    i = j;
    return v;
  }
};

}  // namespace

CoordinateLabel parse_coordinate_label(std::string_view raw) {
  Cursor c{text::decode_utf8(raw)};
  c.skip_space();
  double sign = 1;
  if (c.take(U"-−")) sign = -1;
  else c.take(U"+");
  c.skip_space();
  auto deg = c.number();
  if (!deg) unparsable(raw, "no number");
  double value = *deg;
  c.skip_space();
  bool has_degree = c.take(U"°º");
  c.skip_space();

  // Optional minutes and seconds after a degree sign.
  auto save = c.i;
  if (has_degree) {
    if (auto m = c.number()) {
      c.skip_space();
      if (c.take(U"′'")) {
        if (*m >= 60) unparsable(raw, "minutes must be below 60");
        value += *m / 60.0;
        c.skip_space();
        save = c.i;
        if (auto sec = c.number()) {
          c.skip_space();
          if (c.take(U"″\"")) {
            if (*sec >= 60) unparsable(raw, "seconds must be below 60");
            value += *sec / 3600.0;
            c.skip_space();
          } else {
            c.i = save;
          }
        }
      } else {
        c.i = save;
      }
    }
  }

  char32_t h = text::fold(c.peek());
  GeoAxis axis;
  double hemi;
  switch (h) {
    case U'n': axis = GeoAxis::latitude; hemi = 1; break;
    case U's': axis = GeoAxis::latitude; hemi = -1; break;
    case U'e': axis = GeoAxis::longitude; hemi = 1; break;
    case U'w': axis = GeoAxis::longitude; hemi = -1; break;
    default: unparsable(raw, "missing hemisphere letter");
  }
  ++c.i;
  c.skip_space();
  if (!c.at_end()) unparsable(raw, "trailing characters");
  double limit = axis == GeoAxis::latitude ? 90 : 180;
  if (value > limit) unparsable(raw, "outside the valid range");
  return {axis, sign * hemi * value};
}

std::string format_coordinate(double degrees, GeoAxis axis) {
  char hemi = axis == GeoAxis::latitude ? (degrees < 0 ? 'S' : 'N') : (degrees < 0 ? 'W' : 'E');
  return csv::number(std::abs(degrees)) + "°" + hemi;
}

std::vector<AxisTick> detect_ticks(const PageContent& page, const Region& region, double band_fraction) {
  const BBox& r = region.bbox;
  double bh = band_fraction * r.height(), bw = band_fraction * r.width();
  struct Band {
    BBox area;
    GeoAxis axis;
  };
  const Band bands[] = {
      {{r.x0, r.y1, r.x1, r.y1 + bh}, GeoAxis::longitude},  // top
      {{r.x0, r.y0 - bh, r.x1, r.y0}, GeoAxis::longitude},  // bottom
      {{r.x0 - bw, r.y0, r.x0, r.y1}, GeoAxis::latitude},   // left
      {{r.x1, r.y0, r.x1 + bw, r.y1}, GeoAxis::latitude},   // right
  };
  std::vector<AxisTick> out;
  for (const auto& band : bands) {
    for (const auto& box : reading_order(page.text_boxes)) {
      double cx = box.bbox.center_x(), cy = box.bbox.center_y();
      if (!band.area.contains(cx, cy)) continue;
      try {
        auto label = parse_coordinate_label(box.text);
        if (label.axis != band.axis) continue;
        out.push_back({band.axis, band.axis == GeoAxis::longitude ? cx : cy, label.degrees, box.text});
      } catch (const Error&) {
      }
    }
  }
  return out;
}

namespace {

struct Fit {
  LinearMap map;
  double rms;
};

Fit fit_axis(const std::vector<AxisTick>& ticks, GeoAxis axis) {
  std::vector<const AxisTick*> sel;
  for (const auto& t : ticks)
    if (t.axis == axis) sel.push_back(&t);
  const std::string name = to_string(axis);
  if (sel.size() < 2)
    throw Error(ErrorCode::InsufficientTicks, "need at least two " + name + " ticks",
                {{"axis", name}, {"count", sel.size()}});

  const auto n = static_cast<Eigen::Index>(sel.size());
  Eigen::VectorXd p(n), d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p(i) = sel[i]->pixel;
    d(i) = sel[i]->degrees;
  }
  // Centre the pixels so the solve is well conditioned at page scale.
  double mp = p.mean();
  Eigen::MatrixXd a(n, 2);
  a.col(0) = p.array() - mp;
  a.col(1).setOnes();
  if (a.col(0).cwiseAbs().maxCoeff() == 0)
    throw Error(ErrorCode::DegenerateTicks, "all " + name + " ticks sit on the same pixel", {{"axis", name}});
  if ((d.array() == d(0)).all())
    throw Error(ErrorCode::DegenerateTicks, name + " ticks give a zero slope", {{"axis", name}});
  Eigen::Vector2d coef = a.colPivHouseholderQr().solve(d);
  if (coef(0) == 0 || !std::isfinite(coef(0)))
    throw Error(ErrorCode::DegenerateTicks, name + " ticks give a zero slope", {{"axis", name}});
  LinearMap map{coef(0), coef(1) - coef(0) * mp};
  double sq = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double r = map(p(i)) - d(i);
    sq += r * r;
  }
  return {map, std::sqrt(sq / static_cast<double>(n))};
}

}  // namespace

MapCalibration calibrate(const Region& region, const std::vector<AxisTick>& ticks) {
  auto lon = fit_axis(ticks, GeoAxis::longitude);
  auto lat = fit_axis(ticks, GeoAxis::latitude);
  MapCalibration c;
  c.region = region;
  c.lon_map = lon.map;
  c.lat_map = lat.map;
  c.ticks = ticks;
  c.rms_lon_deg = lon.rms;
  c.rms_lat_deg = lat.rms;
  return c;
}

GeoPoint locate_point(const MapCalibration& cal, double x, double y) {
  if (!cal.region.bbox.contains(x, y))
    throw Error(ErrorCode::PixelOutsideRegion, "point lies outside the map region", {{"pixel", {x, y}}});
  GeoPoint g;
  g.doc_id = cal.doc_id;
  g.calibration_id = cal.calibration_id;
  g.pixel_x = x;
  g.pixel_y = y;
  double lon = cal.lon_map(x), lat = cal.lat_map(y);
  g.longitude = std::clamp(lon, -180.0, 180.0);
  g.latitude = std::clamp(lat, -90.0, 90.0);
  g.out_of_range = g.longitude != lon || g.latitude != lat;
  return g;
}

std::string geo_points_csv(const std::vector<GeoPoint>& points) {
  csv::Rows rows{{"longitude", "latitude", "pixel_x", "pixel_y", "created_by", "created_at"}};
  for (const auto& p : points)
    rows.push_back({csv::number(p.longitude), csv::number(p.latitude), csv::number(p.pixel_x), csv::number(p.pixel_y),
                    p.created_by, format_rfc3339(p.created_at)});
  return csv::write(rows);
}

std::string to_string(GeoAxis a) { return a == GeoAxis::longitude ? "longitude" : "latitude"; }

void to_json(nlohmann::json& j, const AxisTick& t) {
  j = {{"axis", to_string(t.axis)}, {"pixel", t.pixel}, {"degrees", t.degrees}, {"label_text", t.label_text}};
}

void from_json(const nlohmann::json& j, AxisTick& t) {
  auto axis = j.at("axis").get<std::string>();
  if (axis != "longitude" && axis != "latitude") throw Error(ErrorCode::InvalidArgument, "unknown axis '" + axis + "'");
  t.axis = axis == "longitude" ? GeoAxis::longitude : GeoAxis::latitude;
  t.pixel = j.at("pixel").get<double>();
  t.degrees = j.at("degrees").get<double>();
  t.label_text = j.value("label_text", "");
}

void to_json(nlohmann::json& j, const MapCalibration& c) {
  j = {{"calibration_id", c.calibration_id},
       {"doc_id", c.doc_id},
       {"region", c.region},
       {"lon_map", {{"slope", c.lon_map.slope}, {"intercept", c.lon_map.intercept}}},
       {"lat_map", {{"slope", c.lat_map.slope}, {"intercept", c.lat_map.intercept}}},
       {"ticks", c.ticks},
       {"rms_residual_deg", {{"longitude", c.rms_lon_deg}, {"latitude", c.rms_lat_deg}}}};
}

void from_json(const nlohmann::json& j, MapCalibration& c) {
  c.calibration_id = j.value("calibration_id", "");
  c.doc_id = j.value("doc_id", "");
  c.region = j.at("region").get<Region>();
  c.lon_map = {j.at("lon_map").at("slope").get<double>(), j.at("lon_map").at("intercept").get<double>()};
  c.lat_map = {j.at("lat_map").at("slope").get<double>(), j.at("lat_map").at("intercept").get<double>()};
  c.ticks = j.value("ticks", std::vector<AxisTick>{});
  c.rms_lon_deg = j.at("rms_residual_deg").value("longitude", 0.0);
  c.rms_lat_deg = j.at("rms_residual_deg").value("latitude", 0.0);
}

void to_json(nlohmann::json& j, const GeoPoint& p) {
  j = {{"point_id", p.point_id},
       {"doc_id", p.doc_id},
       {"calibration_id", p.calibration_id},
       {"pixel", {p.pixel_x, p.pixel_y}},
       {"longitude", p.longitude},
       {"latitude", p.latitude},
       {"out_of_range", p.out_of_range},
       {"table_row_hint", p.table_row_hint ? nlohmann::json(*p.table_row_hint) : nlohmann::json()},
       {"created_by", p.created_by},
       {"created_at", format_rfc3339(p.created_at)}};
}

void from_json(const nlohmann::json& j, GeoPoint& p) {
  p.point_id = j.value("point_id", "");
  p.doc_id = j.value("doc_id", "");
  p.calibration_id = j.value("calibration_id", "");
  p.pixel_x = j.at("pixel").at(0).get<double>();
  p.pixel_y = j.at("pixel").at(1).get<double>();
  p.longitude = j.at("longitude").get<double>();
  p.latitude = j.at("latitude").get<double>();
  p.out_of_range = j.value("out_of_range", false);
  if (j.contains("table_row_hint") && !j["table_row_hint"].is_null()) p.table_row_hint = j["table_row_hint"].get<int>();
  p.created_by = j.value("created_by", "");
  if (auto ts = parse_rfc3339(j.value("created_at", ""))) p.created_at = *ts;
}

}  // namespace quarry
