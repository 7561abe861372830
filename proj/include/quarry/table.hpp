#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "quarry/document.hpp"
#include "quarry/geometry.hpp"
#include "quarry/region.hpp"
#include "quarry/time.hpp"

namespace quarry {

/// A rectangle of base cells. Rows count from the top of the table.
struct CellSpan {
  int row0 = 0;
  int col0 = 0;
  int row_extent = 1;
  int col_extent = 1;
  std::string content;

  int row_end() const { return row0 + row_extent; }
  int col_end() const { return col0 + col_extent; }
  bool unit() const { return row_extent == 1 && col_extent == 1; }

  friend bool operator==(const CellSpan&, const CellSpan&) = default;
};

/// row_bounds and col_bounds both increase, so row r (from the top) lies
/// between row_bounds[R-r-1] and row_bounds[R-r].
struct CellGrid {
  Region region;
  std::vector<double> row_bounds;
  std::vector<double> col_bounds;
  std::vector<CellSpan> spans;

  int rows() const { return static_cast<int>(row_bounds.size()) - 1; }
  int cols() const { return static_cast<int>(col_bounds.size()) - 1; }

  BBox span_box(const CellSpan& s) const;
  /// Index into spans of the span covering base cell (r, c), or -1.
  int span_at(int r, int c) const;

  /// 1x1 lattice over the region.
  static CellGrid single(const Region& region);

  friend bool operator==(const CellGrid&, const CellGrid&) = default;
};

/// Fixed recognition constants, overridable from the config file.
struct TableThresholds {
  double ruling_merge_pt = 1.5;
  double row_gap_factor = 1.5;
  double col_valley_factor = 1.0;
  double axis_tolerance_pt = 0.5;
  double junction_tolerance_pt = 2.0;
};

/// Empty string when the lattice is a valid partition, otherwise a description.
std::string lattice_violation(const CellGrid& grid);

class TableDetector {
 public:
  virtual ~TableDetector() = default;
  virtual std::string id() const = 0;
  virtual std::vector<Region> detect(const PageContent& page, const TableThresholds& t) const = 0;
};

/// Connected groups of crossing rulings with at least two lines each way.
class RulingLineDetector : public TableDetector {
 public:
  std::string id() const override { return "ruling-lines"; }
  std::vector<Region> detect(const PageContent& page, const TableThresholds& t) const override;
};

/// Fills spans that received no embedded text boxes.
class OcrAdapter {
 public:
  virtual ~OcrAdapter() = default;
  virtual std::string id() const = 0;
  virtual std::string recognize(const PageContent& page, const CellGrid& grid, const CellSpan& span) const = 0;
};

/// Picks up text boxes that overlap the cell but are centred outside the table.
class EmbeddedTextOcr : public OcrAdapter {
 public:
  std::string id() const override { return "embedded-text"; }
  std::string recognize(const PageContent& page, const CellGrid& grid, const CellSpan& span) const override;
};

class TableAdapters {
 public:
  static const TableAdapters& baseline();

  void add(std::shared_ptr<const TableDetector> d) { detectors_.push_back(std::move(d)); }
  void add(std::shared_ptr<const OcrAdapter> o) { ocr_.push_back(std::move(o)); }
  const TableDetector& detector(const std::string& id) const;
  const OcrAdapter& ocr(const std::string& id) const;

 private:
  std::vector<std::shared_ptr<const TableDetector>> detectors_;
  std::vector<std::shared_ptr<const OcrAdapter>> ocr_;
};

std::vector<Region> detect_table_regions(const PageContent& page, const std::string& detector,
                                         const TableThresholds& t = {},
                                         const TableAdapters& adapters = TableAdapters::baseline());

CellGrid recognize_structure(const PageContent& page, const Region& region, const TableThresholds& t = {});

/// Inclusive index range.
struct IndexRange {
  int first = 0;
  int last = 0;
};

CellGrid merge_cells(const CellGrid& grid, IndexRange rows, IndexRange cols);
CellGrid split_cell(const CellGrid& grid, int span_index);

/// `boundary` indexes the new row_bounds entry: 1..R splits an interval at its
/// midpoint, 0 and R+1 grow the table below or above.
CellGrid add_row(const CellGrid& grid, int boundary);
/// `row` counts from the top.
CellGrid delete_row(const CellGrid& grid, int row);
/// 1..C splits at the midpoint, 0 and C+1 grow the table left or right.
CellGrid add_column(const CellGrid& grid, int boundary);
CellGrid delete_column(const CellGrid& grid, int col);

CellGrid set_cell_content(const CellGrid& grid, int span_index, const std::string& content);

CellGrid recognize_content(const PageContent& page, const CellGrid& grid, const std::optional<std::string>& ocr,
                           const TableAdapters& adapters = TableAdapters::baseline());

enum class TableStage { located, structured, filled, confirmed };

struct EditEntry {
  std::string op;
  nlohmann::json params;
  std::string user;
  Timestamp ts{};

  friend bool operator==(const EditEntry&, const EditEntry&) = default;
};

struct TableArtifact {
  std::string table_id;
  std::string doc_id;
  CellGrid grid;
  TableStage stage = TableStage::located;
  std::vector<EditEntry> edit_log;
};

struct StageContext {
  const PageContent* page = nullptr;
  TableThresholds thresholds;
  std::optional<std::string> ocr;
  const TableAdapters* adapters = nullptr;
};

TableArtifact create_table(const std::string& table_id, const std::string& doc_id, const Region& region,
                           const std::string& user, Timestamp ts);

/// Moves one stage forward (running the recognizer) or back to any earlier
/// stage (clearing what that stage produced).
TableArtifact advance_stage(const TableArtifact& artifact, TableStage target, const std::string& user, Timestamp ts,
                            const StageContext& ctx);

/// Applies one user edit {op, params}. Ops: set_region, merge, split, add_row,
/// delete_row, add_column, delete_column, set_content.
TableArtifact apply_edit(const TableArtifact& artifact, const nlohmann::json& edit, const std::string& user,
                         Timestamp ts);

/// Rebuilds an artifact from its log alone.
TableArtifact replay(const std::string& table_id, const std::string& doc_id, const std::vector<EditEntry>& log);

/// Rectangular matrix; merged spans repeat their content in every covered cell.
std::vector<std::vector<std::string>> export_table(const TableArtifact& artifact);

std::string edit_log_jsonl(const std::vector<EditEntry>& log);
std::vector<EditEntry> parse_edit_log_jsonl(const std::string& text);

std::string to_string(TableStage s);
TableStage table_stage_from_string(const std::string& s);

void to_json(nlohmann::json& j, const CellSpan& s);
void from_json(const nlohmann::json& j, CellSpan& s);
void to_json(nlohmann::json& j, const CellGrid& g);
void from_json(const nlohmann::json& j, CellGrid& g);
void to_json(nlohmann::json& j, const EditEntry& e);
void from_json(const nlohmann::json& j, EditEntry& e);
void to_json(nlohmann::json& j, const TableArtifact& a);
void from_json(const nlohmann::json& j, TableArtifact& a);

}  // namespace quarry
