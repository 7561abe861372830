#pragma once

#include <json.hpp>

#include "quarry/geometry.hpp"

namespace quarry {

enum class RegionSource { detected, user_drawn };

/// A rectangle on one page: a table or a map figure.
struct Region {
  int page_index = 0;
  BBox bbox;
  RegionSource source = RegionSource::user_drawn;

  friend bool operator==(const Region&, const Region&) = default;
};

void to_json(nlohmann::json& j, const Region& r);
void from_json(const nlohmann::json& j, Region& r);

}  // namespace quarry
