#include "quarry/table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <map>
#include <sstream>
#include <tuple>

#include "quarry/error.hpp"
#include "quarry/text.hpp"

namespace quarry {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void sort_spans(std::vector<CellSpan>& spans) {
  std::sort(spans.begin(), spans.end(),
            [](const CellSpan& a, const CellSpan& b) { return std::tie(a.row0, a.col0) < std::tie(b.row0, b.col0); });
}

std::vector<CellSpan> unit_spans(int rows, int cols) {
  std::vector<CellSpan> out;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out.push_back({r, c, 1, 1, ""});
  return out;
}

void check_index(int value, int lo, int hi, const char* what) {
  if (value < lo || value > hi)
    throw Error(ErrorCode::IndexOutOfRange, std::string(what) + " " + std::to_string(value) + " out of range",
                {{"min", lo}, {"max", hi}});
}

/// Groups sorted values whose neighbours lie within tol; returns cluster means.
std::vector<double> cluster(std::vector<double> values, double tol) {
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i + 1;
    while (j < values.size() && values[j] - values[j - 1] <= tol) ++j;
    out.push_back(std::accumulate(values.begin() + i, values.begin() + j, 0.0) / static_cast<double>(j - i));
    i = j;
  }
  return out;
}

std::string join_nonempty(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += p;
  }
  return out;
}

std::string boxes_text(const std::vector<TextBox>& boxes) {
  std::vector<std::string> parts;
  for (const auto& b : reading_order(boxes)) parts.push_back(b.text);
  return join_nonempty(parts);
}

// Row index from the top whose band contains y; a y on a boundary goes up.
int row_at(const CellGrid& g, double y) {
  int R = g.rows();
  auto it = std::upper_bound(g.row_bounds.begin(), g.row_bounds.end(), y);
  int k = static_cast<int>(it - g.row_bounds.begin()) - 1;  // largest k with bounds[k] <= y
  k = std::clamp(k, 0, R - 1);
  return R - 1 - k;
}

// Column index containing x; a x on a boundary goes left.
int col_at(const CellGrid& g, double x) {
  auto it = std::lower_bound(g.col_bounds.begin() + 1, g.col_bounds.end(), x);
  int c = static_cast<int>(it - g.col_bounds.begin()) - 1;
  return std::clamp(c, 0, g.cols() - 1);
}

}  // namespace

BBox CellGrid::span_box(const CellSpan& s) const {
  int R = rows();
  return {col_bounds[s.col0], row_bounds[R - s.row_end()], col_bounds[s.col_end()], row_bounds[R - s.row0]};
}

int CellGrid::span_at(int r, int c) const {
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& s = spans[i];
    if (r >= s.row0 && r < s.row_end() && c >= s.col0 && c < s.col_end()) return static_cast<int>(i);
  }
  return -1;
}

CellGrid CellGrid::single(const Region& region) {
  CellGrid g;
  g.region = region;
  g.row_bounds = {region.bbox.y0, region.bbox.y1};
  g.col_bounds = {region.bbox.x0, region.bbox.x1};
  g.spans = unit_spans(1, 1);
  return g;
}

std::string lattice_violation(const CellGrid& g) {
  if (g.rows() < 1 || g.cols() < 1) return "empty lattice";
  for (std::size_t i = 1; i < g.row_bounds.size(); ++i)
    if (!(g.row_bounds[i] > g.row_bounds[i - 1])) return "row bounds not increasing";
  for (std::size_t i = 1; i < g.col_bounds.size(); ++i)
    if (!(g.col_bounds[i] > g.col_bounds[i - 1])) return "column bounds not increasing";
  const BBox& b = g.region.bbox;
  if (g.row_bounds.front() != b.y0 || g.row_bounds.back() != b.y1 || g.col_bounds.front() != b.x0 ||
      g.col_bounds.back() != b.x1)
    return "lattice does not tile the region";
  int R = g.rows(), C = g.cols();
  std::vector<int> owner(static_cast<std::size_t>(R) * C, 0);
  for (const auto& s : g.spans) {
    if (s.row_extent < 1 || s.col_extent < 1 || s.row0 < 0 || s.col0 < 0 || s.row_end() > R || s.col_end() > C)
      return "span out of bounds";
    for (int r = s.row0; r < s.row_end(); ++r)
      for (int c = s.col0; c < s.col_end(); ++c)
        if (owner[static_cast<std::size_t>(r) * C + c]++) return "spans overlap";
  }
  if (std::find(owner.begin(), owner.end(), 0) != owner.end()) return "base cell not covered";
  return "";
}

// ---- detection -------------------------------------------------------------

std::vector<Region> RulingLineDetector::detect(const PageContent& page, const TableThresholds& t) const {
  std::vector<Segment> hs, vs;
  for (const auto& s : page.ruling_segments) {
    if (s.horizontal(t.axis_tolerance_pt))
      hs.push_back({std::min(s.x0, s.x1), 0.5 * (s.y0 + s.y1), std::max(s.x0, s.x1), 0.5 * (s.y0 + s.y1)});
    else if (s.vertical(t.axis_tolerance_pt))
      vs.push_back({0.5 * (s.x0 + s.x1), std::min(s.y0, s.y1), 0.5 * (s.x0 + s.x1), std::max(s.y0, s.y1)});
  }
  std::size_t nh = hs.size(), n = nh + vs.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  double tol = t.junction_tolerance_pt;
  for (std::size_t i = 0; i < nh; ++i)
    for (std::size_t j = 0; j < vs.size(); ++j) {
      const auto& h = hs[i];
      const auto& v = vs[j];
      if (v.x0 >= h.x0 - tol && v.x0 <= h.x1 + tol && h.y0 >= v.y0 - tol && h.y0 <= v.y1 + tol)
        parent[find(i)] = find(nh + j);
    }

  struct Group {
    int h = 0, v = 0;
    BBox box{1e300, 1e300, -1e300, -1e300};
  };
  std::map<std::size_t, Group> groups;
  for (std::size_t i = 0; i < n; ++i) {
    const Segment& s = i < nh ? hs[i] : vs[i - nh];
    auto& g = groups[find(i)];
    (i < nh ? g.h : g.v)++;
    g.box = g.box.united({s.x0, s.y0, s.x1, s.y1});
  }
  std::vector<BBox> boxes;
  for (auto& [root, g] : groups) {
    if (g.h < 2 || g.v < 2) continue;
    BBox b{std::max(0.0, g.box.x0), std::max(0.0, g.box.y0), std::min(page.width_pt, g.box.x1),
           std::min(page.height_pt, g.box.y1)};
    if (b.valid()) boxes.push_back(b);
  }
  // Overlapping groups become one region.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < boxes.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < boxes.size() && !changed; ++j)
        if (boxes[i].intersects(boxes[j])) {
          boxes[i] = boxes[i].united(boxes[j]);
          boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
        }
  }
  std::sort(boxes.begin(), boxes.end(), [](const BBox& a, const BBox& b) {
    if (a.y1 != b.y1) return a.y1 > b.y1;
    return a.x0 < b.x0;
  });
  std::vector<Region> out;
  for (const auto& b : boxes) out.push_back({page.page_index, b, RegionSource::detected});
  return out;
}

std::string EmbeddedTextOcr::recognize(const PageContent& page, const CellGrid& grid, const CellSpan& span) const {
  BBox cell = grid.span_box(span);
  std::vector<TextBox> hits;
  for (const auto& b : page.text_boxes)
    if (b.bbox.intersects(cell) && !grid.region.bbox.contains(b.bbox.center_x(), b.bbox.center_y()))
      hits.push_back(b);
  return boxes_text(hits);
}

const TableAdapters& TableAdapters::baseline() {
  static const TableAdapters instance = [] {
    TableAdapters a;
    a.add(std::make_shared<RulingLineDetector>());
    a.add(std::make_shared<EmbeddedTextOcr>());
    return a;
  }();
  return instance;
}

const TableDetector& TableAdapters::detector(const std::string& id) const {
  for (const auto& d : detectors_)
    if (d->id() == id) return *d;
  throw Error(ErrorCode::UnknownDetector, "no table detector named '" + id + "'");
}

const OcrAdapter& TableAdapters::ocr(const std::string& id) const {
  for (const auto& o : ocr_)
    if (o->id() == id) return *o;
  throw Error(ErrorCode::UnknownAdapter, "no OCR adapter named '" + id + "'");
}

std::vector<Region> detect_table_regions(const PageContent& page, const std::string& detector,
                                         const TableThresholds& t, const TableAdapters& adapters) {
  return adapters.detector(detector).detect(page, t);
}

// ---- structure -------------------------------------------------------------

namespace {

/// Region edges plus interior boundaries; values too close to an edge fold into it.
std::vector<double> with_edges(double lo, double hi, const std::vector<double>& interior, double tol) {
  std::vector<double> out{lo};
  for (double v : interior)
    if (v - lo > tol && hi - v > tol && v > out.back()) out.push_back(v);
  out.push_back(hi);
  return out;
}

/// Boundaries at the midpoints of whitespace gaps wider than min_gap.
std::vector<double> valley_bounds(std::vector<std::pair<double, double>> intervals, double min_gap) {
  std::sort(intervals.begin(), intervals.end());
  std::vector<double> out;
  if (intervals.empty()) return out;
  double reach = intervals.front().second;
  for (std::size_t i = 1; i < intervals.size(); ++i) {
    if (intervals[i].first - reach > min_gap) out.push_back(0.5 * (reach + intervals[i].first));
    reach = std::max(reach, intervals[i].second);
  }
  return out;
}

std::vector<double> text_row_bounds(const std::vector<TextBox>& boxes, double gap_factor) {
  std::vector<double> heights;
  for (const auto& b : boxes) heights.push_back(b.bbox.height());
  double line_h = median(heights);

  // Lines by bottom edge, then rows where the baseline step is large.
  std::vector<const TextBox*> sorted;
  for (const auto& b : boxes) sorted.push_back(&b);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->bbox.y0 > b->bbox.y0; });
  struct Line {
    double base, top, bottom;
  };
  std::vector<Line> lines;
  for (auto* b : sorted) {
    if (!lines.empty() && lines.back().base - b->bbox.y0 <= 0.5 * line_h) {
      lines.back().top = std::max(lines.back().top, b->bbox.y1);
      lines.back().bottom = std::min(lines.back().bottom, b->bbox.y0);
      continue;
    }
    lines.push_back({b->bbox.y0, b->bbox.y1, b->bbox.y0});
  }
  std::vector<double> bounds;
  double group_bottom = lines.empty() ? 0 : lines.front().bottom;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i - 1].base - lines[i].base > gap_factor * line_h) {
      bounds.push_back(0.5 * (group_bottom + lines[i].top));
      group_bottom = lines[i].bottom;
    } else {
      group_bottom = std::min(group_bottom, lines[i].bottom);
    }
  }
  std::sort(bounds.begin(), bounds.end());
  return bounds;
}

std::vector<double> text_col_bounds(const std::vector<TextBox>& boxes, double valley_factor) {
  std::vector<double> char_w;
  std::vector<std::pair<double, double>> spans;
  for (const auto& b : boxes) {
    auto n = text::code_point_count(b.text);
    if (n) char_w.push_back(b.bbox.width() / static_cast<double>(n));
    spans.emplace_back(b.bbox.x0, b.bbox.x1);
  }
  return valley_bounds(spans, valley_factor * median(char_w));
}

}  // namespace

CellGrid recognize_structure(const PageContent& page, const Region& region, const TableThresholds& t) {
  BBox area = region.bbox;
  BBox reach = area.inflated(t.ruling_merge_pt);
  std::vector<TextBox> boxes;
  for (const auto& b : page.text_boxes)
    if (area.contains(b.bbox.center_x(), b.bbox.center_y())) boxes.push_back(b);

  std::vector<double> hy, vx;
  for (const auto& s : page.ruling_segments) {
    if (s.horizontal(t.axis_tolerance_pt)) {
      double y = 0.5 * (s.y0 + s.y1);
      double mx = 0.5 * (s.x0 + s.x1);
      if (y >= reach.y0 && y <= reach.y1 && mx >= area.x0 && mx <= area.x1) hy.push_back(y);
    } else if (s.vertical(t.axis_tolerance_pt)) {
      double x = 0.5 * (s.x0 + s.x1);
      double my = 0.5 * (s.y0 + s.y1);
      if (x >= reach.x0 && x <= reach.x1 && my >= area.y0 && my <= area.y1) vx.push_back(x);
    }
  }
  if (hy.empty() && vx.empty() && boxes.empty())
    throw Error(ErrorCode::EmptyRegion, "region contains no rulings and no text");

  auto hclusters = cluster(hy, t.ruling_merge_pt);
  auto vclusters = cluster(vx, t.ruling_merge_pt);
  bool ruled_rows = hclusters.size() >= 2;
  bool ruled_cols = vclusters.size() >= 2;

  // Empty strips between the region edge and the outermost ruling are trimmed off.
  auto has_text = [&](double lo, double hi, bool vertical_axis) {
    for (const auto& b : boxes) {
      double c = vertical_axis ? b.bbox.center_y() : b.bbox.center_x();
      if (c >= lo && c <= hi) return true;
    }
    return false;
  };
  if (ruled_rows) {
    if (hclusters.front() > area.y0 && !has_text(area.y0, hclusters.front(), true)) area.y0 = hclusters.front();
    if (hclusters.back() < area.y1 && !has_text(hclusters.back(), area.y1, true)) area.y1 = hclusters.back();
  }
  if (ruled_cols) {
    if (vclusters.front() > area.x0 && !has_text(area.x0, vclusters.front(), false)) area.x0 = vclusters.front();
    if (vclusters.back() < area.x1 && !has_text(vclusters.back(), area.x1, false)) area.x1 = vclusters.back();
  }
  if (!area.valid()) area = region.bbox;

  CellGrid g;
  g.region = region;
  g.region.bbox = area;
  g.row_bounds = with_edges(area.y0, area.y1,
                            ruled_rows ? hclusters : text_row_bounds(boxes, t.row_gap_factor), t.ruling_merge_pt);
  g.col_bounds = with_edges(area.x0, area.x1,
                            ruled_cols ? vclusters : text_col_bounds(boxes, t.col_valley_factor), t.ruling_merge_pt);
  g.spans = unit_spans(g.rows(), g.cols());
  return g;
}

// ---- lattice edits ---------------------------------------------------------

CellGrid merge_cells(const CellGrid& grid, IndexRange rows, IndexRange cols) {
  check_index(rows.first, 0, grid.rows() - 1, "row");
  check_index(rows.last, rows.first, grid.rows() - 1, "row");
  check_index(cols.first, 0, grid.cols() - 1, "column");
  check_index(cols.last, cols.first, grid.cols() - 1, "column");
  CellGrid out = grid;
  out.spans.clear();
  std::vector<const CellSpan*> covered;
  for (const auto& s : grid.spans) {
    bool hit = s.row0 <= rows.last && s.row_end() > rows.first && s.col0 <= cols.last && s.col_end() > cols.first;
    if (!hit) {
      out.spans.push_back(s);
      continue;
    }
    bool inside = s.row0 >= rows.first && s.row_end() <= rows.last + 1 && s.col0 >= cols.first &&
                  s.col_end() <= cols.last + 1;
    if (!inside)
      throw Error(ErrorCode::PartialSpanOverlap, "selection cuts through a merged cell",
                  {{"span", {s.row0, s.col0, s.row_extent, s.col_extent}}});
    covered.push_back(&s);
  }
  std::sort(covered.begin(), covered.end(),
            [](auto* a, auto* b) { return std::tie(a->row0, a->col0) < std::tie(b->row0, b->col0); });
  std::vector<std::string> parts;
  for (auto* s : covered) parts.push_back(s->content);
  out.spans.push_back(
      {rows.first, cols.first, rows.last - rows.first + 1, cols.last - cols.first + 1, join_nonempty(parts)});
  sort_spans(out.spans);
  return out;
}

CellGrid split_cell(const CellGrid& grid, int span_index) {
  check_index(span_index, 0, static_cast<int>(grid.spans.size()) - 1, "span");
  const CellSpan s = grid.spans[span_index];
  if (s.unit()) throw Error(ErrorCode::AlreadyUnit, "cell is not merged");
  CellGrid out = grid;
  out.spans.erase(out.spans.begin() + span_index);
  for (int r = s.row0; r < s.row_end(); ++r)
    for (int c = s.col0; c < s.col_end(); ++c)
      out.spans.push_back({r, c, 1, 1, r == s.row0 && c == s.col0 ? s.content : ""});
  sort_spans(out.spans);
  return out;
}

namespace {

// Row and column edits share one implementation over a transposed view.
struct Axis {
  bool rows;
  std::vector<double>& bounds(CellGrid& g) const { return rows ? g.row_bounds : g.col_bounds; }
  int& start(CellSpan& s) const { return rows ? s.row0 : s.col0; }
  int& extent(CellSpan& s) const { return rows ? s.row_extent : s.col_extent; }
  int& other_start(CellSpan& s) const { return rows ? s.col0 : s.row0; }
  int& other_extent(CellSpan& s) const { return rows ? s.col_extent : s.row_extent; }
  double& lo(CellGrid& g) const { return rows ? g.region.bbox.y0 : g.region.bbox.x0; }
  double& hi(CellGrid& g) const { return rows ? g.region.bbox.y1 : g.region.bbox.x1; }
  // Rows are numbered from the top, bounds from the bottom.
  int to_index(const CellGrid& g, int interval) const {
    return rows ? static_cast<int>(g.row_bounds.size()) - 2 - interval : interval;
  }
};

double median_step(const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 1; i < b.size(); ++i) d.push_back(b[i] - b[i - 1]);
  return median(d);
}

CellGrid add_line(const CellGrid& grid, int boundary, Axis ax) {
  CellGrid out = grid;
  auto& b = ax.bounds(out);
  int n = static_cast<int>(b.size()) - 1;
  check_index(boundary, 0, n + 1, ax.rows ? "row boundary" : "column boundary");
  int other_n = ax.rows ? grid.cols() : grid.rows();

  if (boundary == 0 || boundary == n + 1) {
    double step = median_step(b);
    bool at_low = boundary == 0;
    if (at_low) {
      b.insert(b.begin(), b.front() - step);
      ax.lo(out) = b.front();
    } else {
      b.push_back(b.back() + step);
      ax.hi(out) = b.back();
    }
    // New line's index in table order.
    int pos = ax.to_index(out, at_low ? 0 : n);
    for (auto& s : out.spans)
      if (ax.start(s) >= pos) ax.start(s)++;
    for (int k = 0; k < other_n; ++k) {
      CellSpan s;
      ax.start(s) = pos;
      ax.other_start(s) = k;
      out.spans.push_back(s);
    }
  } else {
    b.insert(b.begin() + boundary, 0.5 * (b[boundary - 1] + b[boundary]));
    // The split interval in table order, before the insert. Its first half
    // (top or left) keeps the content; the second is new.
    int split = ax.to_index(grid, boundary - 1);
    std::vector<CellSpan> added;
    for (auto& s : out.spans) {
      int st = ax.start(s), ext = ax.extent(s);
      if (st > split) {
        ax.start(s)++;
      } else if (st + ext > split) {
        if (ext == 1) {
          CellSpan copy = s;
          copy.content.clear();
          ax.start(copy) = split + 1;
          added.push_back(copy);
        } else {
          ax.extent(s)++;
        }
      }
    }
    out.spans.insert(out.spans.end(), added.begin(), added.end());
  }
  sort_spans(out.spans);
  return out;
}

CellGrid delete_line(const CellGrid& grid, int line, Axis ax) {
  CellGrid out = grid;
  auto& b = ax.bounds(out);
  int n = static_cast<int>(b.size()) - 1;
  check_index(line, 0, n - 1, ax.rows ? "row" : "column");
  if (n == 1) throw Error(ErrorCode::CannotDeleteLast, ax.rows ? "table needs at least one row" : "table needs at least one column");

  int interval = ax.to_index(grid, line);  // bounds[interval]..bounds[interval+1]
  if (interval == 0) {
    b.erase(b.begin());
    ax.lo(out) = b.front();
  } else if (interval == n - 1) {
    b.pop_back();
    ax.hi(out) = b.back();
  } else if (ax.rows) {
    b.erase(b.begin() + interval + 1);  // the row above grows down
  } else {
    b.erase(b.begin() + interval);  // the column to the left grows right
  }

  std::vector<CellSpan> kept;
  for (auto s : out.spans) {
    int st = ax.start(s), ext = ax.extent(s);
    if (st > line) {
      ax.start(s)--;
    } else if (st + ext > line) {
      if (ext == 1) continue;
      ax.extent(s)--;
    }
    kept.push_back(std::move(s));
  }
  out.spans = std::move(kept);
  sort_spans(out.spans);
  return out;
}

}  // namespace

CellGrid add_row(const CellGrid& grid, int boundary) { return add_line(grid, boundary, Axis{true}); }
CellGrid delete_row(const CellGrid& grid, int row) { return delete_line(grid, row, Axis{true}); }
CellGrid add_column(const CellGrid& grid, int boundary) { return add_line(grid, boundary, Axis{false}); }
CellGrid delete_column(const CellGrid& grid, int col) { return delete_line(grid, col, Axis{false}); }

CellGrid set_cell_content(const CellGrid& grid, int span_index, const std::string& content) {
  check_index(span_index, 0, static_cast<int>(grid.spans.size()) - 1, "span");
  CellGrid out = grid;
  out.spans[span_index].content = content;
  return out;
}

// ---- content ---------------------------------------------------------------

CellGrid recognize_content(const PageContent& page, const CellGrid& grid, const std::optional<std::string>& ocr,
                           const TableAdapters& adapters) {
  const OcrAdapter* engine = ocr ? &adapters.ocr(*ocr) : nullptr;
  std::vector<std::vector<TextBox>> per_span(grid.spans.size());
  const BBox& area = grid.region.bbox;
  for (const auto& box : page.text_boxes) {
    double cx = box.bbox.center_x(), cy = box.bbox.center_y();
    if (!area.contains(cx, cy)) continue;
    int idx = grid.span_at(row_at(grid, cy), col_at(grid, cx));
    if (idx >= 0) per_span[idx].push_back(box);
  }
  CellGrid out = grid;
  for (std::size_t i = 0; i < out.spans.size(); ++i) {
    if (!per_span[i].empty())
      out.spans[i].content = boxes_text(per_span[i]);
    else
      out.spans[i].content = engine ? engine->recognize(page, grid, grid.spans[i]) : "";
  }
  return out;
}

// ---- artifact lifecycle ----------------------------------------------------

namespace {

void require_valid(const CellGrid& g) {
  auto problem = lattice_violation(g);
  if (!problem.empty()) throw Error(ErrorCode::InvalidArgument, "lattice invariant broken: " + problem);
}

CellGrid cleared(const CellGrid& g) {
  CellGrid out = g;
  for (auto& s : out.spans) s.content.clear();
  return out;
}

void require_stage(const TableArtifact& a, std::initializer_list<TableStage> allowed, const std::string& op) {
  if (std::find(allowed.begin(), allowed.end(), a.stage) == allowed.end())
    throw Error(ErrorCode::InvalidTransition, op + " is not allowed at stage " + to_string(a.stage),
                {{"stage", to_string(a.stage)}});
}

int int_param(const nlohmann::json& p, const char* key) {
  if (!p.is_object() || !p.contains(key) || !p[key].is_number_integer())
    throw Error(ErrorCode::InvalidArgument, std::string("missing integer parameter '") + key + "'");
  return p[key].get<int>();
}

IndexRange range_param(const nlohmann::json& p, const char* key) {
  if (!p.is_object() || !p.contains(key) || !p[key].is_array() || p[key].size() != 2)
    throw Error(ErrorCode::InvalidArgument, std::string("parameter '") + key + "' must be [first, last]");
  return {p[key][0].get<int>(), p[key][1].get<int>()};
}

}  // namespace

TableArtifact create_table(const std::string& table_id, const std::string& doc_id, const Region& region,
                           const std::string& user, Timestamp ts) {
  if (!region.bbox.valid()) throw Error(ErrorCode::InvalidArgument, "region must have positive area");
  TableArtifact a;
  a.table_id = table_id;
  a.doc_id = doc_id;
  a.grid = CellGrid::single(region);
  a.stage = TableStage::located;
  a.edit_log.push_back({"create", {{"region", region}}, user, ts});
  return a;
}

TableArtifact advance_stage(const TableArtifact& artifact, TableStage target, const std::string& user, Timestamp ts,
                            const StageContext& ctx) {
  int from = static_cast<int>(artifact.stage), to = static_cast<int>(target);
  if (to == from || to > from + 1)
    throw Error(ErrorCode::InvalidTransition,
                "cannot move from " + to_string(artifact.stage) + " to " + to_string(target),
                {{"from", to_string(artifact.stage)}, {"to", to_string(target)}});
  TableArtifact out = artifact;
  nlohmann::json params = {{"target", to_string(target)}};
  const TableAdapters& adapters = ctx.adapters ? *ctx.adapters : TableAdapters::baseline();
  auto need_page = [&] {
    if (!ctx.page) throw Error(ErrorCode::InvalidArgument, "page content required to run recognition");
    return *ctx.page;
  };
  if (to > from) {
    if (target == TableStage::structured) {
      out.grid = recognize_structure(need_page(), artifact.grid.region, ctx.thresholds);
      params["grid"] = out.grid;
    } else if (target == TableStage::filled) {
      out.grid = recognize_content(need_page(), artifact.grid, ctx.ocr, adapters);
      params["grid"] = out.grid;
      if (ctx.ocr) params["ocr"] = *ctx.ocr;
    }
  } else if (target == TableStage::located) {
    out.grid = CellGrid::single(artifact.grid.region);
  } else if (target == TableStage::structured) {
    out.grid = cleared(artifact.grid);
  }
  out.stage = target;
  out.edit_log.push_back({"stage", params, user, ts});
  return out;
}

TableArtifact apply_edit(const TableArtifact& artifact, const nlohmann::json& edit, const std::string& user,
                         Timestamp ts) {
  if (!edit.is_object() || !edit.contains("op") || !edit["op"].is_string())
    throw Error(ErrorCode::InvalidArgument, "edit must be an object with a string 'op'");
  const std::string op = edit["op"];
  const nlohmann::json params = edit.value("params", nlohmann::json::object());
  TableArtifact out = artifact;
  const auto structural = {TableStage::structured, TableStage::filled};

  if (op == "set_region") {
    require_stage(artifact, {TableStage::located}, op);
    if (!params.contains("bbox")) throw Error(ErrorCode::InvalidArgument, "set_region needs 'bbox'");
    Region r = artifact.grid.region;
    r.bbox = params["bbox"].get<BBox>();
    r.source = RegionSource::user_drawn;
    if (!r.bbox.valid()) throw Error(ErrorCode::InvalidArgument, "region must have positive area");
    out.grid = CellGrid::single(r);
  } else if (op == "merge") {
    require_stage(artifact, structural, op);
    out.grid = merge_cells(artifact.grid, range_param(params, "rows"), range_param(params, "cols"));
  } else if (op == "split") {
    require_stage(artifact, structural, op);
    out.grid = split_cell(artifact.grid, int_param(params, "span"));
  } else if (op == "add_row") {
    require_stage(artifact, structural, op);
    out.grid = add_row(artifact.grid, int_param(params, "at"));
  } else if (op == "delete_row") {
    require_stage(artifact, structural, op);
    out.grid = delete_row(artifact.grid, int_param(params, "row"));
  } else if (op == "add_column") {
    require_stage(artifact, structural, op);
    out.grid = add_column(artifact.grid, int_param(params, "at"));
  } else if (op == "delete_column") {
    require_stage(artifact, structural, op);
    out.grid = delete_column(artifact.grid, int_param(params, "col"));
  } else if (op == "set_content") {
    require_stage(artifact, {TableStage::filled}, op);
    if (!params.contains("content") || !params["content"].is_string())
      throw Error(ErrorCode::InvalidArgument, "set_content needs a string 'content'");
    out.grid = set_cell_content(artifact.grid, int_param(params, "span"), params["content"]);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown table edit '" + op + "'");
  }
  require_valid(out.grid);
  out.edit_log.push_back({op, params, user, ts});
  return out;
}

TableArtifact replay(const std::string& table_id, const std::string& doc_id, const std::vector<EditEntry>& log) {
  if (log.empty() || log.front().op != "create")
    throw Error(ErrorCode::InvalidArgument, "edit log must start with a create entry");
  TableArtifact a = create_table(table_id, doc_id, log.front().params.at("region").get<Region>(),
                                 log.front().user, log.front().ts);
  for (std::size_t i = 1; i < log.size(); ++i) {
    const EditEntry& e = log[i];
    if (e.op == "stage") {
      TableStage target = table_stage_from_string(e.params.at("target"));
      if (e.params.contains("grid")) {
        a.grid = e.params["grid"].get<CellGrid>();
        a.stage = target;
        a.edit_log.push_back(e);
      } else {
        a = advance_stage(a, target, e.user, e.ts, StageContext{});
      }
    } else {
      a = apply_edit(a, {{"op", e.op}, {"params", e.params}}, e.user, e.ts);
    }
  }
  return a;
}

std::vector<std::vector<std::string>> export_table(const TableArtifact& artifact) {
  if (artifact.stage < TableStage::filled)
    throw Error(ErrorCode::NotFilled, "table content has not been recognized yet",
                {{"stage", to_string(artifact.stage)}});
  const CellGrid& g = artifact.grid;
  std::vector<std::vector<std::string>> m(g.rows(), std::vector<std::string>(g.cols()));
  for (const auto& s : g.spans)
    for (int r = s.row0; r < s.row_end(); ++r)
      for (int c = s.col0; c < s.col_end(); ++c) m[r][c] = s.content;
  return m;
}

std::string edit_log_jsonl(const std::vector<EditEntry>& log) {
  std::string out;
  for (const auto& e : log) {
    out += nlohmann::json(e).dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<EditEntry> parse_edit_log_jsonl(const std::string& text) {
  std::vector<EditEntry> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<EditEntry>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("bad edit log line: ") + e.what());
    }
  }
  return out;
}

// ---- serialization ---------------------------------------------------------

std::string to_string(TableStage s) {
  switch (s) {
    case TableStage::located: return "located";
    case TableStage::structured: return "structured";
    case TableStage::filled: return "filled";
    case TableStage::confirmed: return "confirmed";
  }
  return "located";
}

TableStage table_stage_from_string(const std::string& s) {
  for (auto st : {TableStage::located, TableStage::structured, TableStage::filled, TableStage::confirmed})
    if (to_string(st) == s) return st;
  throw Error(ErrorCode::InvalidArgument, "unknown table stage '" + s + "'");
}

void to_json(nlohmann::json& j, const CellSpan& s) {
  j = {{"row0", s.row0}, {"col0", s.col0}, {"row_extent", s.row_extent}, {"col_extent", s.col_extent},
       {"content", s.content}};
}

void from_json(const nlohmann::json& j, CellSpan& s) {
  s.row0 = j.at("row0").get<int>();
  s.col0 = j.at("col0").get<int>();
  s.row_extent = j.value("row_extent", 1);
  s.col_extent = j.value("col_extent", 1);
  s.content = j.value("content", "");
}

void to_json(nlohmann::json& j, const CellGrid& g) {
  j = {{"region", g.region}, {"row_bounds", g.row_bounds}, {"col_bounds", g.col_bounds}, {"spans", g.spans}};
}

void from_json(const nlohmann::json& j, CellGrid& g) {
  g.region = j.at("region").get<Region>();
  g.row_bounds = j.at("row_bounds").get<std::vector<double>>();
  g.col_bounds = j.at("col_bounds").get<std::vector<double>>();
  g.spans = j.at("spans").get<std::vector<CellSpan>>();
}

void to_json(nlohmann::json& j, const EditEntry& e) {
  j = {{"op", e.op}, {"params", e.params}, {"user", e.user}, {"ts", format_rfc3339(e.ts)}};
}

void from_json(const nlohmann::json& j, EditEntry& e) {
  e.op = j.at("op").get<std::string>();
  e.params = j.value("params", nlohmann::json::object());
  e.user = j.value("user", "");
  auto ts = parse_rfc3339(j.at("ts").get<std::string>());
  if (!ts) throw Error(ErrorCode::InvalidArgument, "bad timestamp in edit log");
  e.ts = *ts;
}

void to_json(nlohmann::json& j, const TableArtifact& a) {
  j = {{"table_id", a.table_id}, {"doc_id", a.doc_id}, {"grid", a.grid}, {"stage", to_string(a.stage)},
       {"edit_log", a.edit_log}};
}

void from_json(const nlohmann::json& j, TableArtifact& a) {
  a.table_id = j.at("table_id").get<std::string>();
  a.doc_id = j.at("doc_id").get<std::string>();
  a.grid = j.at("grid").get<CellGrid>();
  a.stage = table_stage_from_string(j.at("stage").get<std::string>());
  a.edit_log = j.value("edit_log", std::vector<EditEntry>{});
}

}  // namespace quarry
