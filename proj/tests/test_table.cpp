#include <random>

#include <gtest/gtest.h>

#include "quarry/error.hpp"
#include "quarry/pdf.hpp"
#include "quarry/table.hpp"
#include "synthetic_pdf.hpp"
#include "synthetic_tables.hpp"

using namespace quarry;
using quarry::testing::Matrix;
using quarry::testing::PdfBuilder;

namespace {

const Timestamp kT0{std::chrono::milliseconds{1'700'000'000'000}};

PageContent first_page(const PdfBuilder& b) {
  auto bytes = b.build();
  return pages_from_pdf(pdf::parse(bytes)).at(0);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

// Independent partition check: every base cell covered exactly once.
bool partitions(const CellGrid& g) {
  int R = static_cast<int>(g.row_bounds.size()) - 1, C = static_cast<int>(g.col_bounds.size()) - 1;
  if (R < 1 || C < 1) return false;
  std::vector<std::vector<int>> hits(R, std::vector<int>(C, 0));
  long area = 0;
  for (const auto& s : g.spans) {
    if (s.row0 < 0 || s.col0 < 0 || s.row0 + s.row_extent > R || s.col0 + s.col_extent > C) return false;
    area += static_cast<long>(s.row_extent) * s.col_extent;
    for (int r = 0; r < s.row_extent; ++r)
      for (int c = 0; c < s.col_extent; ++c) hits[s.row0 + r][s.col0 + c]++;
  }
  for (auto& row : hits)
    for (int h : row)
      if (h != 1) return false;
  return area == static_cast<long>(R) * C;
}

CellGrid unit_grid(int R, int C, double cell = 10) {
  Region region{0, {0, 0, C * cell, R * cell}, RegionSource::user_drawn};
  CellGrid g = CellGrid::single(region);
  g.row_bounds.clear();
  g.col_bounds.clear();
  for (int i = 0; i <= R; ++i) g.row_bounds.push_back(i * cell);
  for (int i = 0; i <= C; ++i) g.col_bounds.push_back(i * cell);
  g.region = region;
  g.spans.clear();
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) g.spans.push_back({r, c, 1, 1, "r" + std::to_string(r) + "c" + std::to_string(c)});
  return g;
}

TextBox box(double x0, double y0, double x1, double y1, const std::string& text) {
  return {{x0, y0, x1, y1}, text, 10};
}

}  // namespace

// ---- detection --------------------------------------------------------------

TEST(Detect, SingleRuledTable) {
  PdfBuilder b;
  b.page();
  auto t = quarry::testing::draw_ruled_table(b, 100, 600, {{"a", "b", "c"}, {"d", "e", "f"}, {"g", "h", "i"}});
  auto regions = detect_table_regions(first_page(b), "ruling-lines");
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_EQ(regions[0].source, RegionSource::detected);
  EXPECT_NEAR(regions[0].bbox.x0, t.outer.x0, 2);
  EXPECT_NEAR(regions[0].bbox.y0, t.outer.y0, 2);
  EXPECT_NEAR(regions[0].bbox.x1, t.outer.x1, 2);
  EXPECT_NEAR(regions[0].bbox.y1, t.outer.y1, 2);
}

TEST(Detect, BlankPage) {
  PdfBuilder b;
  b.page();
  EXPECT_TRUE(detect_table_regions(first_page(b), "ruling-lines").empty());
}

TEST(Detect, TwoStackedTablesTopFirst) {
  PdfBuilder b;
  b.page();
  auto low = quarry::testing::draw_ruled_table(b, 80, 300, {{"x", "y"}, {"z", "w"}});
  auto high = quarry::testing::draw_ruled_table(b, 80, 700, {{"1", "2", "3"}});
  auto regions = detect_table_regions(first_page(b), "ruling-lines");
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_NEAR(regions[0].bbox.y1, high.outer.y1, 2);
  EXPECT_NEAR(regions[1].bbox.y1, low.outer.y1, 2);
  EXPECT_NEAR(regions[1].bbox.x1, low.outer.x1, 2);
}

TEST(Detect, LoneLinesAreNotTables) {
  PdfBuilder b;
  b.page().line(50, 500, 400, 500).line(50, 480, 400, 480).line(200, 100, 200, 300);
  EXPECT_TRUE(detect_table_regions(first_page(b), "ruling-lines").empty());
}

TEST(Detect, UnknownDetector) {
  EXPECT_EQ(code_of([] { detect_table_regions(PageContent{}, "detectron"); }), ErrorCode::UnknownDetector);
}

// ---- structure --------------------------------------------------------------

TEST(Structure, RuledThreeByThree) {
  PdfBuilder b;
  b.page();
  auto t = quarry::testing::draw_ruled_table(b, 100, 600, {{"a", "b", "c"}, {"d", "e", "f"}, {"g", "h", "i"}});
  auto page = first_page(b);
  auto region = detect_table_regions(page, "ruling-lines").at(0);
  auto g = recognize_structure(page, region);
  EXPECT_EQ(g.rows(), 3);
  EXPECT_EQ(g.cols(), 3);
  EXPECT_EQ(g.spans.size(), 9u);
  for (const auto& s : g.spans) EXPECT_TRUE(s.unit());
  for (int i = 0; i <= 3; ++i) {
    EXPECT_NEAR(g.col_bounds[i], t.col_x[i], 0.01);
    EXPECT_NEAR(g.row_bounds[i], t.row_y[3 - i], 0.01);
  }
  EXPECT_TRUE(partitions(g));
}

TEST(Structure, LooseUserRegionIsTrimmedToRulings) {
  PdfBuilder b;
  b.page();
  auto t = quarry::testing::draw_ruled_table(b, 100, 600, {{"a", "b"}, {"c", "d"}});
  auto page = first_page(b);
  Region loose{0, {t.outer.x0 - 10, t.outer.y0 - 10, t.outer.x1 + 10, t.outer.y1 + 10}, RegionSource::user_drawn};
  auto g = recognize_structure(page, loose);
  EXPECT_EQ(g.rows(), 2);
  EXPECT_EQ(g.cols(), 2);
  EXPECT_NEAR(g.region.bbox.x0, t.outer.x0, 0.01);
  EXPECT_EQ(lattice_violation(g), "");
}

TEST(Structure, SingleTextBoxIsOneByOne) {
  PageContent page{0, 612, 792, {box(100, 100, 150, 110, "alone")}, {}};
  auto g = recognize_structure(page, {0, {90, 90, 200, 120}, RegionSource::user_drawn});
  EXPECT_EQ(g.rows(), 1);
  EXPECT_EQ(g.cols(), 1);
  EXPECT_EQ(g.spans.size(), 1u);
}

TEST(Structure, BorderlessTwoColumnsFromValley) {
  // Six-point characters, 40 pt between the columns.
  PageContent page;
  page.width_pt = 612;
  page.height_pt = 792;
  for (int r = 0; r < 4; ++r) {
    double y = 500 - r * 20;
    page.text_boxes.push_back(box(100, y, 100 + 6 * 5, y + 9, "abcde"));
    page.text_boxes.push_back(box(170, y, 170 + 6 * 3, y + 9, "xyz"));
  }
  auto g = recognize_structure(page, {0, {95, 430, 200, 515}, RegionSource::user_drawn});
  EXPECT_EQ(g.cols(), 2);
  EXPECT_EQ(g.rows(), 4);
  EXPECT_GT(g.col_bounds[1], 130);
  EXPECT_LT(g.col_bounds[1], 170);
}

TEST(Structure, EmptyRegion) {
  PageContent page{0, 612, 792, {box(10, 10, 20, 20, "far")}, {}};
  EXPECT_EQ(code_of([&] { recognize_structure(page, {0, {300, 300, 400, 400}, RegionSource::user_drawn}); }),
            ErrorCode::EmptyRegion);
}

// ---- merge / split ----------------------------------------------------------

TEST(Merge, RowOfTwoLeavesThreeSpans) {
  auto g = unit_grid(2, 2);
  auto m = merge_cells(g, {0, 0}, {0, 1});
  EXPECT_EQ(m.spans.size(), 3u);
  EXPECT_EQ(m.spans[0].content, "r0c0 r0c1");
  EXPECT_EQ(m.spans[0].col_extent, 2);
  EXPECT_EQ(g.spans.size(), 4u);  // input untouched
  EXPECT_TRUE(partitions(m));
}

TEST(Merge, SingleCellIsIdentity) {
  auto g = unit_grid(2, 2);
  EXPECT_EQ(merge_cells(g, {1, 1}, {0, 0}), g);
}

TEST(Merge, PartialOverlapRejected) {
  auto g = merge_cells(unit_grid(2, 2), {0, 0}, {0, 1});
  EXPECT_EQ(code_of([&] { merge_cells(g, {0, 1}, {1, 1}); }), ErrorCode::PartialSpanOverlap);
}

TEST(Merge, SkipsEmptyContents) {
  auto g = unit_grid(1, 3);
  g.spans[1].content = "";
  EXPECT_EQ(merge_cells(g, {0, 0}, {0, 2}).spans[0].content, "r0c0 r0c2");
}

TEST(Split, OneByTwo) {
  auto g = unit_grid(1, 2);
  g = merge_cells(g, {0, 0}, {0, 1});
  g.spans[0].content = "ab";
  auto s = split_cell(g, 0);
  ASSERT_EQ(s.spans.size(), 2u);
  EXPECT_EQ(s.spans[0].content, "ab");
  EXPECT_EQ(s.spans[1].content, "");
}

TEST(Split, TwoByTwoAndUnit) {
  auto g = merge_cells(unit_grid(2, 2), {0, 1}, {0, 1});
  EXPECT_EQ(split_cell(g, 0).spans.size(), 4u);
  EXPECT_EQ(code_of([] { split_cell(unit_grid(2, 2), 0); }), ErrorCode::AlreadyUnit);
  EXPECT_EQ(code_of([] { split_cell(unit_grid(2, 2), 9); }), ErrorCode::IndexOutOfRange);
}

// ---- rows and columns -------------------------------------------------------

TEST(Rows, AddAtMidpoint) {
  auto g = unit_grid(1, 1);
  g.row_bounds = {100, 140};
  g.region.bbox.y0 = 100;
  g.region.bbox.y1 = 140;
  auto a = add_row(g, 1);
  EXPECT_EQ(a.row_bounds, (std::vector<double>{100, 120, 140}));
  ASSERT_EQ(a.spans.size(), 2u);
  EXPECT_EQ(a.spans[0].content, "r0c0");  // upper half keeps the content
  EXPECT_EQ(a.spans[1].content, "");
  EXPECT_EQ(lattice_violation(a), "");
}

TEST(Rows, AddAtEdgesUsesMedianHeight) {
  auto g = unit_grid(3, 2);  // rows 10 pt tall
  auto top = add_row(g, 4);
  EXPECT_DOUBLE_EQ(top.row_bounds.back(), 40);
  EXPECT_DOUBLE_EQ(top.region.bbox.y1, 40);
  EXPECT_EQ(top.spans[0].content, "");
  EXPECT_EQ(top.spans[2].content, "r0c0");
  auto bottom = add_row(g, 0);
  EXPECT_DOUBLE_EQ(bottom.row_bounds.front(), -10);
  EXPECT_EQ(bottom.spans.back().row0, 3);
  EXPECT_EQ(code_of([&] { add_row(g, 5); }), ErrorCode::IndexOutOfRange);
}

TEST(Rows, AddGrowsCrossingSpan) {
  auto g = merge_cells(unit_grid(2, 2), {0, 1}, {0, 0});
  auto a = add_row(g, 1);  // splits the bottom row
  EXPECT_TRUE(partitions(a));
  EXPECT_EQ(a.spans[0].row_extent, 3);
}

TEST(Rows, DeleteLastRejected) {
  EXPECT_EQ(code_of([] { delete_row(unit_grid(1, 3), 0); }), ErrorCode::CannotDeleteLast);
  EXPECT_EQ(code_of([] { delete_row(unit_grid(2, 3), 2); }), ErrorCode::IndexOutOfRange);
}

TEST(Rows, DeleteInteriorIsAbsorbedFromAbove) {
  auto g = unit_grid(3, 1);
  auto d = delete_row(g, 1);
  EXPECT_EQ(d.row_bounds, (std::vector<double>{0, 10, 30}));
  ASSERT_EQ(d.spans.size(), 2u);
  EXPECT_EQ(d.spans[0].content, "r0c0");
  EXPECT_EQ(d.spans[1].content, "r2c0");
  auto top = delete_row(g, 0);
  EXPECT_EQ(top.row_bounds, (std::vector<double>{0, 10, 20}));
  EXPECT_DOUBLE_EQ(top.region.bbox.y1, 20);
}

TEST(Columns, DeleteShrinksCrossingSpan) {
  auto g = merge_cells(unit_grid(2, 3), {0, 0}, {0, 2});
  auto d = delete_column(g, 1);
  EXPECT_EQ(d.spans[0].col_extent, 2);
  EXPECT_TRUE(partitions(d));
  EXPECT_EQ(d.col_bounds, (std::vector<double>{0, 20, 30}));
}

TEST(Columns, AddSplitsLeftKeepsContent) {
  auto a = add_column(unit_grid(1, 2), 2);
  EXPECT_EQ(a.col_bounds, (std::vector<double>{0, 10, 15, 20}));
  EXPECT_EQ(a.spans[1].content, "r0c1");
  EXPECT_EQ(a.spans[2].content, "");
}

// ---- content ----------------------------------------------------------------

TEST(Content, BoxCentredInCell) {
  auto g = unit_grid(2, 3);
  for (auto& s : g.spans) s.content.clear();
  PageContent page{0, 612, 792, {box(21, 1, 29, 9, "hit")}, {}};  // bottom row, last column
  auto f = recognize_content(page, g, std::nullopt);
  EXPECT_EQ(f.spans[g.span_at(1, 2)].content, "hit");
}

TEST(Content, BoundaryTiesGoLeftAndUp) {
  auto g = unit_grid(2, 2);
  for (auto& s : g.spans) s.content.clear();
  PageContent page{0, 612, 792, {box(6, 12, 14, 18, "col"), box(2, 6, 8, 14, "row")}, {}};
  auto f = recognize_content(page, g, std::nullopt);
  EXPECT_EQ(f.spans[f.span_at(0, 0)].content, "col row");
}

TEST(Content, OcrOnlyForEmptyCellsAndUnknownAdapter) {
  auto g = unit_grid(1, 2);
  for (auto& s : g.spans) s.content.clear();
  // "spill" is centred just outside the table but overlaps the right cell.
  PageContent page{0, 612, 792, {box(2, 2, 8, 8, "in"), box(15, 8, 25, 14, "spill")}, {}};
  auto f = recognize_content(page, g, std::string("embedded-text"));
  EXPECT_EQ(f.spans[0].content, "in");
  EXPECT_EQ(f.spans[1].content, "spill");
  EXPECT_EQ(recognize_content(page, g, std::nullopt).spans[1].content, "");
  EXPECT_EQ(code_of([&] { recognize_content(page, g, std::string("tesseract")); }), ErrorCode::UnknownAdapter);
}

TEST(Content, RuledThreeByThreeRecovered) {
  Matrix cells = {{"Sample", "SiO2", "Zr"}, {"A-1", "51.2", "140"}, {"B 2", "60.0", "98"}};
  PdfBuilder b;
  b.page();
  quarry::testing::draw_ruled_table(b, 72, 650, cells);
  auto page = first_page(b);
  auto g = recognize_structure(page, detect_table_regions(page, "ruling-lines").at(0));
  auto f = recognize_content(page, g, std::nullopt);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(f.spans[f.span_at(r, c)].content, cells[r][c]);
}

// ---- artifact lifecycle -----------------------------------------------------

class Lifecycle : public ::testing::Test {
 protected:
  void SetUp() override {
    PdfBuilder b;
    b.page();
    quarry::testing::draw_ruled_table(b, 72, 650, cells);
    page = first_page(b);
    ctx.page = &page;
    region = detect_table_regions(page, "ruling-lines").at(0);
  }
  Matrix cells = {{"h1", "h2"}, {"a", "b"}, {"c", "d"}};
  PageContent page;
  StageContext ctx;
  Region region;
};

TEST_F(Lifecycle, ForwardThroughStages) {
  auto a = create_table("t1", "d1", region, "u", kT0);
  EXPECT_EQ(a.stage, TableStage::located);
  a = advance_stage(a, TableStage::structured, "u", kT0, ctx);
  EXPECT_EQ(a.grid.rows(), 3);
  EXPECT_EQ(code_of([&] { export_table(a); }), ErrorCode::NotFilled);
  a = advance_stage(a, TableStage::filled, "u", kT0, ctx);
  a = advance_stage(a, TableStage::confirmed, "u", kT0, ctx);
  EXPECT_EQ(export_table(a), cells);
  EXPECT_EQ(a.edit_log.size(), 4u);
}

TEST_F(Lifecycle, SkippingIsRejected) {
  auto a = create_table("t1", "d1", region, "u", kT0);
  EXPECT_EQ(code_of([&] { advance_stage(a, TableStage::filled, "u", kT0, ctx); }), ErrorCode::InvalidTransition);
  EXPECT_EQ(code_of([&] { advance_stage(a, TableStage::located, "u", kT0, ctx); }), ErrorCode::InvalidTransition);
}

TEST_F(Lifecycle, ResetToStructuredClearsContent) {
  auto a = create_table("t1", "d1", region, "u", kT0);
  for (auto st : {TableStage::structured, TableStage::filled, TableStage::confirmed})
    a = advance_stage(a, st, "u", kT0, ctx);
  auto r = advance_stage(a, TableStage::structured, "u", kT0, ctx);
  EXPECT_EQ(r.grid.rows(), 3);
  for (const auto& s : r.grid.spans) EXPECT_EQ(s.content, "");
  auto l = advance_stage(a, TableStage::located, "u", kT0, ctx);
  EXPECT_EQ(l.grid.spans.size(), 1u);
}

TEST_F(Lifecycle, EditsAreStageGated) {
  auto a = create_table("t1", "d1", region, "u", kT0);
  EXPECT_EQ(code_of([&] { apply_edit(a, {{"op", "add_row"}, {"params", {{"at", 1}}}}, "u", kT0); }),
            ErrorCode::InvalidTransition);
  a = advance_stage(a, TableStage::structured, "u", kT0, ctx);
  EXPECT_EQ(code_of([&] {
              apply_edit(a, {{"op", "set_content"}, {"params", {{"span", 0}, {"content", "x"}}}}, "u", kT0);
            }),
            ErrorCode::InvalidTransition);
  a = apply_edit(a, {{"op", "merge"}, {"params", {{"rows", {0, 0}}, {"cols", {0, 1}}}}}, "u", kT0);
  a = advance_stage(a, TableStage::filled, "u", kT0, ctx);
  EXPECT_EQ(export_table(a)[0], (std::vector<std::string>{"h1 h2", "h1 h2"}));
  EXPECT_EQ(code_of([&] { apply_edit(a, {{"op", "teleport"}}, "u", kT0); }), ErrorCode::InvalidArgument);
}

TEST_F(Lifecycle, ReplayAndJsonlRoundTrip) {
  auto a = create_table("t1", "d1", region, "u", kT0);
  a = advance_stage(a, TableStage::structured, "u", kT0, ctx);
  a = apply_edit(a, {{"op", "add_column"}, {"params", {{"at", 1}}}}, "v", kT0 + std::chrono::seconds(1));
  a = advance_stage(a, TableStage::filled, "u", kT0, ctx);
  a = apply_edit(a, {{"op", "set_content"}, {"params", {{"span", 1}, {"content", "fixed"}}}}, "v", kT0);
  auto text = edit_log_jsonl(a.edit_log);
  auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
  EXPECT_EQ(first["op"], "create");
  EXPECT_TRUE(first.contains("params") && first.contains("user") && first.contains("ts"));
  auto log = parse_edit_log_jsonl(text);
  EXPECT_EQ(log, a.edit_log);
  auto b = replay("t1", "d1", log);
  EXPECT_EQ(b.grid, a.grid);
  EXPECT_EQ(b.stage, a.stage);
}

TEST(Export, ReplicatesMergedContent) {
  TableArtifact a;
  a.stage = TableStage::filled;
  a.grid = merge_cells(unit_grid(2, 2), {0, 0}, {0, 1});
  a.grid.spans[0].content = "H";
  EXPECT_EQ(export_table(a), (Matrix{{"H", "H"}, {"r1c0", "r1c1"}}));
  a.grid = unit_grid(2, 2);
  EXPECT_EQ(export_table(a), (Matrix{{"r0c0", "r0c1"}, {"r1c0", "r1c1"}}));
}

// ---- properties -------------------------------------------------------------

TEST(TableProperty, MergeThenSplitRestoresPartition) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    int R = 1 + rng() % 6, C = 1 + rng() % 6;
    auto g = unit_grid(R, C);
    int r0 = rng() % R, c0 = rng() % C;
    int r1 = r0 + rng() % (R - r0), c1 = c0 + rng() % (C - c0);
    auto m = merge_cells(g, {r0, r1}, {c0, c1});
    if (r0 == r1 && c0 == c1) {
      EXPECT_EQ(m, g);
      continue;
    }
    auto s = split_cell(m, m.span_at(r0, c0));
    ASSERT_EQ(s.spans.size(), g.spans.size());
    for (std::size_t i = 0; i < s.spans.size(); ++i) {
      EXPECT_EQ(s.spans[i].row0, g.spans[i].row0);
      EXPECT_EQ(s.spans[i].col0, g.spans[i].col0);
      EXPECT_TRUE(s.spans[i].unit());
    }
  }
}

TEST(TableProperty, RandomEditsKeepPartition) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    auto g = unit_grid(1 + rng() % 4, 1 + rng() % 4);
    for (int step = 0; step < 25; ++step) {
      int R = g.rows(), C = g.cols();
      try {
        switch (rng() % 7) {
          case 0: {
            int r0 = rng() % R, c0 = rng() % C;
            g = merge_cells(g, {r0, r0 + static_cast<int>(rng() % (R - r0))},
                            {c0, c0 + static_cast<int>(rng() % (C - c0))});
            break;
          }
          case 1: g = split_cell(g, rng() % g.spans.size()); break;
          case 2: g = add_row(g, rng() % (R + 2)); break;
          case 3: g = add_column(g, rng() % (C + 2)); break;
          case 4: g = delete_row(g, rng() % R); break;
          case 5: g = delete_column(g, rng() % C); break;
          default: g = set_cell_content(g, rng() % g.spans.size(), "x"); break;
        }
      } catch (const Error& e) {
        ASSERT_TRUE(e.code() == ErrorCode::PartialSpanOverlap || e.code() == ErrorCode::AlreadyUnit ||
                    e.code() == ErrorCode::CannotDeleteLast)
            << e.what();
      }
      ASSERT_TRUE(partitions(g));
      ASSERT_EQ(lattice_violation(g), "");
    }
  }
}

TEST(TableProperty, ContentIsDeterministic) {
  std::mt19937 rng(21);
  PdfBuilder b;
  b.page();
  quarry::testing::draw_ruled_table(b, 60, 700, quarry::testing::random_cells(rng, 5, 4));
  auto page = first_page(b);
  auto g = recognize_structure(page, detect_table_regions(page, "ruling-lines").at(0));
  EXPECT_EQ(recognize_content(page, g, std::nullopt), recognize_content(page, g, std::nullopt));
}

TEST(TableProperty, RuledCorpusFullRecovery) {
  std::mt19937 rng(1234);
  for (int trial = 0; trial < 40; ++trial) {
    int R = 1 + rng() % 8, C = 1 + rng() % 8;
    auto cells = quarry::testing::random_cells(rng, R, C);
    PdfBuilder b;
    b.page();
    quarry::testing::draw_ruled_table(b, 40, 740, cells);
    auto page = first_page(b);
    auto regions = detect_table_regions(page, "ruling-lines");
    ASSERT_EQ(regions.size(), 1u);
    auto a = create_table("t", "d", regions[0], "u", kT0);
    StageContext ctx;
    ctx.page = &page;
    a = advance_stage(a, TableStage::structured, "u", kT0, ctx);
    a = advance_stage(a, TableStage::filled, "u", kT0, ctx);
    EXPECT_EQ(export_table(a), cells) << "R=" << R << " C=" << C;
  }
}

TEST(TableProperty, BorderlessColumnCount) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    int C = 2 + rng() % 3, R = 3 + rng() % 5;
    auto cells = quarry::testing::random_cells(rng, R, C, false);
    PdfBuilder b;
    b.page();
    auto t = quarry::testing::draw_borderless_table(b, 60, 700, cells, 10, 2.0 + (rng() % 100) / 50.0);
    auto page = first_page(b);
    Region r{0, {t.outer.x0 - 4, t.outer.y0 - 4, t.outer.x1 + 4, t.outer.y1 + 4}, RegionSource::user_drawn};
    auto g = recognize_structure(page, r);
    EXPECT_EQ(g.cols(), C);
    EXPECT_EQ(g.rows(), R);
  }
}
