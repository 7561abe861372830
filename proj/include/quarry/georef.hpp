#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "quarry/document.hpp"
#include "quarry/region.hpp"
#include "quarry/time.hpp"

namespace quarry {

enum class GeoAxis { longitude, latitude };

struct AxisTick {
  GeoAxis axis = GeoAxis::longitude;
  double pixel = 0;  // x for longitude, y for latitude
  double degrees = 0;
  std::string label_text;

  friend bool operator==(const AxisTick&, const AxisTick&) = default;
};

/// degrees = slope * pixel + intercept
struct LinearMap {
  double slope = 0;
  double intercept = 0;

  double operator()(double pixel) const { return slope * pixel + intercept; }
  friend bool operator==(const LinearMap&, const LinearMap&) = default;
};

struct MapCalibration {
  std::string calibration_id;
  std::string doc_id;
  Region region;
  LinearMap lon_map;
  LinearMap lat_map;
  std::vector<AxisTick> ticks;
  double rms_lon_deg = 0;
  double rms_lat_deg = 0;
};

struct GeoPoint {
  std::string point_id;
  std::string doc_id;
  std::string calibration_id;
  double pixel_x = 0;
  double pixel_y = 0;
  double longitude = 0;
  double latitude = 0;
  bool out_of_range = false;  // set when clamping changed a coordinate
  std::optional<int> table_row_hint;
  std::string created_by;
  Timestamp created_at{};

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct CoordinateLabel {
  GeoAxis axis;
  double degrees;
};

/// [sign] number [°|º] [minutes ′|'] [seconds ″|"] hemisphere(N|S|E|W).
CoordinateLabel parse_coordinate_label(std::string_view text);

/// Canonical "D°H"; zero is written as N or E.
std::string format_coordinate(double degrees, GeoAxis axis);

/// Labels centred in the band outside each region edge. Bands above and below
/// hold longitudes, bands left and right hold latitudes.
std::vector<AxisTick> detect_ticks(const PageContent& page, const Region& region, double band_fraction = 0.08);

MapCalibration calibrate(const Region& region, const std::vector<AxisTick>& ticks);

GeoPoint locate_point(const MapCalibration& cal, double x, double y);

/// Columns: longitude, latitude, pixel_x, pixel_y, created_by, created_at.
std::string geo_points_csv(const std::vector<GeoPoint>& points);

std::string to_string(GeoAxis a);

void to_json(nlohmann::json& j, const AxisTick& t);
void from_json(const nlohmann::json& j, AxisTick& t);
void to_json(nlohmann::json& j, const MapCalibration& c);
void from_json(const nlohmann::json& j, MapCalibration& c);
void to_json(nlohmann::json& j, const GeoPoint& p);
void from_json(const nlohmann::json& j, GeoPoint& p);

}  // namespace quarry
