#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "quarry/geometry.hpp"
#include "quarry/pdf.hpp"
#include "quarry/time.hpp"

namespace quarry {

using Id = std::string;

enum class DocStatus { parsing, ready, failed };

struct TextBox {
  BBox bbox;
  std::string text;
  double font_size_pt = 0;

  friend bool operator==(const TextBox&, const TextBox&) = default;
};

struct PageContent {
  int page_index = 0;
  double width_pt = 0;
  double height_pt = 0;
  std::vector<TextBox> text_boxes;
  std::vector<Segment> ruling_segments;

  friend bool operator==(const PageContent&, const PageContent&) = default;
};

struct MetaInfo {
  std::string title;
  std::vector<std::string> authors;
  std::string venue;
  std::optional<int> year;
  std::string abstract;

  friend bool operator==(const MetaInfo&, const MetaInfo&) = default;
};

/// A partial MetaInfo as proposed by one adapter.
struct MetaCandidate {
  std::string adapter_id;
  std::optional<std::string> title;
  std::optional<std::vector<std::string>> authors;
  std::optional<std::string> venue;
  std::optional<int> year;
  std::optional<std::string> abstract;
};

struct DocumentRecord {
  Id doc_id;
  Id project_id;
  int page_count = 0;
  std::vector<PageContent> pages;
  MetaInfo meta;
  Id import_user;
  Timestamp import_time{};
  std::optional<Id> last_editor;
  std::optional<Timestamp> last_edit_time;
  std::optional<Id> principal;
  DocStatus status = DocStatus::parsing;
};

/// What a meta adapter gets to look at.
struct AdapterInput {
  std::span<const std::uint8_t> pdf_bytes;
  const std::vector<PageContent>& pages;
  const std::map<std::string, std::string>& info;
};

class MetaAdapter {
 public:
  virtual ~MetaAdapter() = default;
  virtual std::string id() const = 0;
  virtual MetaCandidate extract(const AdapterInput& input) const = 0;
};

/// Largest-font line on page one is the title; the block beneath it lists authors.
class LayoutHeuristicAdapter : public MetaAdapter {
 public:
  std::string id() const override { return "layout"; }
  MetaCandidate extract(const AdapterInput& input) const override;
};

/// Reads the embedded document information dictionary.
class PdfInfoAdapter : public MetaAdapter {
 public:
  std::string id() const override { return "pdfinfo"; }
  MetaCandidate extract(const AdapterInput& input) const override;
};

/// Registered adapters in priority order (index 0 wins ties).
class MetaRegistry {
 public:
  static MetaRegistry baseline();

  void add(std::shared_ptr<const MetaAdapter> adapter) { adapters_.push_back(std::move(adapter)); }
  bool empty() const { return adapters_.empty(); }
  const std::vector<std::shared_ptr<const MetaAdapter>>& adapters() const { return adapters_; }
  std::vector<std::string> priority() const;

 private:
  std::vector<std::shared_ptr<const MetaAdapter>> adapters_;
};

struct IngestContext {
  Id doc_id;
  Id project_id;
  Id user;
  Timestamp now{};
  const MetaRegistry* registry = nullptr;
  pdf::ParseOptions parse_options;
};

/// Pages in backend form: text boxes clipped to the page, coordinates in points.
std::vector<PageContent> pages_from_pdf(const pdf::File& file);

/// Parses the bytes and runs meta extraction. Permission checks are the caller's job.
DocumentRecord ingest_document(std::span<const std::uint8_t> pdf_bytes, const IngestContext& ctx);

MetaInfo extract_meta(const DocumentRecord& doc, std::span<const std::uint8_t> pdf_bytes,
                      const MetaRegistry& registry);

/// Field-wise majority vote; ties go to the earliest adapter in `priority`.
MetaInfo vote_fields(const std::vector<MetaCandidate>& candidates, const std::vector<std::string>& priority);

/// Text boxes in reading order: top-to-bottom lines, left-to-right within a line.
std::vector<TextBox> reading_order(std::vector<TextBox> boxes);
/// Reading-order boxes grouped into lines.
std::vector<std::vector<TextBox>> reading_lines(std::vector<TextBox> boxes);

std::vector<TextBox> get_page_text(const DocumentRecord& doc, int page_index);

/// Concatenated page text: boxes on a line joined by ' ', lines by '\n'.
std::string page_text(const PageContent& page);

std::string to_string(DocStatus s);
DocStatus doc_status_from_string(const std::string& s);

void to_json(nlohmann::json& j, const BBox& b);
void from_json(const nlohmann::json& j, BBox& b);
void to_json(nlohmann::json& j, const Segment& s);
void from_json(const nlohmann::json& j, Segment& s);
void to_json(nlohmann::json& j, const TextBox& t);
void from_json(const nlohmann::json& j, TextBox& t);
void to_json(nlohmann::json& j, const PageContent& p);
void from_json(const nlohmann::json& j, PageContent& p);
void to_json(nlohmann::json& j, const MetaInfo& m);
void from_json(const nlohmann::json& j, MetaInfo& m);
void to_json(nlohmann::json& j, const DocumentRecord& d);
void from_json(const nlohmann::json& j, DocumentRecord& d);

}  // namespace quarry
