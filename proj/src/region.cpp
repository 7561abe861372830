#include "quarry/region.hpp"

#include "quarry/document.hpp"

namespace quarry {

void to_json(nlohmann::json& j, const Region& r) {
  j = {{"page_index", r.page_index},
       {"bbox", r.bbox},
       {"source", r.source == RegionSource::detected ? "detected" : "user_drawn"}};
}

void from_json(const nlohmann::json& j, Region& r) {
  r.page_index = j.at("page_index").get<int>();
  r.bbox = j.at("bbox").get<BBox>();
  r.source = j.value("source", "user_drawn") == "detected" ? RegionSource::detected : RegionSource::user_drawn;
}

}  // namespace quarry
