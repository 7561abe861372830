#include "fixture_project.hpp"

namespace quarry::testing {

namespace {

const Timestamp kT{std::chrono::milliseconds{1'650'000'000'000}};

DocumentRecord document(const std::string& id, const std::string& title, std::optional<int> year) {
  DocumentRecord d;
  d.doc_id = id;
  d.project_id = "fixture";
  d.page_count = 1;
  d.pages = {PageContent{0, 612, 792, {}, {}}};
  d.meta.title = title;
  d.meta.year = year;
  d.import_user = "u1";
  d.import_time = kT;
  d.status = DocStatus::ready;
  return d;
}

Annotation annotation(const std::string& id, const std::string& doc, std::size_t start, const std::string& surface,
                      const std::string& label) {
  Annotation a;
  a.annotation_id = id;
  a.doc_id = doc;
  a.start = start;
  a.end = start + surface.size();
  a.surface_text = surface;
  a.label_id = label;
  a.origin = AnnotationOrigin::manual;
  a.author = "u1";
  a.created_at = kT;
  return a;
}

GeoPoint point(const std::string& id, const std::string& doc, double lon, double lat) {
  GeoPoint p;
  p.point_id = id;
  p.doc_id = doc;
  p.calibration_id = "cal-" + doc;
  p.longitude = lon;
  p.latitude = lat;
  p.created_by = "u1";
  p.created_at = kT;
  return p;
}

}  // namespace

TableArtifact matrix_table(const std::string& table_id, const std::string& doc_id,
                           const std::vector<std::vector<std::string>>& cells, TableStage stage) {
  TableArtifact t;
  t.table_id = table_id;
  t.doc_id = doc_id;
  t.stage = stage;
  int rows = static_cast<int>(cells.size());
  int cols = static_cast<int>(cells.front().size());
  auto& g = t.grid;
  g.region = Region{0, BBox{50, 700 - 20.0 * rows, 50 + 60.0 * cols, 700}, RegionSource::user_drawn};
  for (int i = 0; i <= rows; ++i) g.row_bounds.push_back(700 - 20.0 * (rows - i));
  for (int i = 0; i <= cols; ++i) g.col_bounds.push_back(50 + 60.0 * i);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (cells[r][c] == "<") {
        g.spans.back().col_extent++;
        continue;
      }
      g.spans.push_back(CellSpan{r, c, 1, 1, cells[r][c]});
    }
  return t;
}

FixtureProject fixture_project() {
  FixtureProject p;
  p.schema.headers = {"Sample", "SiO2", "Zr", "Rock type", "Reference", "Year", "Longitude", "Latitude"};
  p.schema.aliases = {{"zr ppm", "Zr"}, {"sample no", "Sample"}};
  p.schema.label_to_header = {{"rock", "Rock type"}};
  p.schema.meta_to_header = {{"title", "Reference"}, {"year", "Year"}};
  p.schema.map_to_header = {{"longitude", "Longitude"}, {"latitude", "Latitude"}};

  FixtureDocument d1{document("d1", "Granites of the north ridge", 2019), {}};
  d1.artifacts.tables = {matrix_table("t1", "d1",
                                      {{"Table 1. Whole-rock data", "<", "<"},
                                       {"Sample no.", "SiO2 (wt%)", "Zr ppm"},
                                       {"NR-1", "72.4", "180"},
                                       {"NR-2", "70.1", "205"}})};
  d1.artifacts.annotations = {annotation("a-d1-2", "d1", 40, "diorite", "rock"),
                              annotation("a-d1-1", "d1", 10, "granite", "rock")};
  d1.artifacts.points = {point("p-d1-1", "d1", 104.25, 35.5), point("p-d1-2", "d1", 104.5, 35.75)};

  FixtureDocument d2{document("d2", "Basalt, \"fresh\" and altered", std::nullopt), {}};
  d2.artifacts.tables = {
      matrix_table("t2", "d2", {{"Sample", "Zr"}, {"B-1", "95"}, {"B-2", ""}}),
      matrix_table("t3", "d2", {{"sample", "SiO2"}, {"B-3", "48.9"}}),
      matrix_table("t4", "d2", {{"Sample", "Zr"}, {"B-9", "1"}}, TableStage::filled),
      matrix_table("t5", "d2", {{"foo", "bar"}, {"1", "2"}}),
  };
  d2.artifacts.annotations = {annotation("a-d2-1", "d2", 0, "basalt", "rock"),
                              annotation("a-d2-2", "d2", 30, "dolerite", "rock")};
  d2.artifacts.points = {point("p-d2-1", "d2", -12.5, 64.25), point("p-d2-2", "d2", -13, 64)};
  d2.artifacts.override_.points = {{"p-d2-2", 2, 2}};
  d2.artifacts.override_.annotations = {{"a-d2-2", 1, 2}};

  FixtureDocument d3{document("d3", "Survey notes", 2021), {}};
  d3.artifacts.annotations = {annotation("a-d3-1", "d3", 5, "mica\nschist", "rock")};

  p.documents = {d1, d2, d3};
  return p;
}

}  // namespace quarry::testing
