#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "quarry/annotate.hpp"
#include "quarry/document.hpp"
#include "quarry/georef.hpp"
#include "quarry/table.hpp"

namespace quarry {

/// meta_to_header keys: title, authors, venue, year, abstract.
/// map_to_header keys: longitude, latitude.
struct ProjectSchema {
  std::vector<std::string> headers;
  std::map<std::string, std::string> aliases;
  std::map<std::string, std::string> label_to_header;
  std::map<std::string, std::string> meta_to_header;
  std::map<std::string, std::string> map_to_header;

  friend bool operator==(const ProjectSchema&, const ProjectSchema&) = default;
};

/// Throws NoHeaders or InvalidArgument.
void validate_schema(const ProjectSchema& schema);

/// Lowercase, whitespace collapsed, trailing "(unit)"/"[unit]" removed, punctuation dropped.
std::string normalize_header(std::string_view s);

std::optional<std::string> match_header(std::string_view candidate, const ProjectSchema& schema);

enum class SummaryLevel { file, project };
enum class SourceKind { table, meta, text, map };

struct Provenance {
  std::string doc_id;
  SourceKind kind = SourceKind::table;
  std::string source_id;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct IntegrationWarning {
  std::string doc_id;
  std::string source_id;
  std::string code;
  std::string message;

  friend bool operator==(const IntegrationWarning&, const IntegrationWarning&) = default;
};

struct SummaryTable {
  SummaryLevel level = SummaryLevel::file;
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::vector<std::optional<Provenance>>> provenance;  // parallel to rows
  std::vector<IntegrationWarning> warnings;

  friend bool operator==(const SummaryTable&, const SummaryTable&) = default;
};

/// Binds one point or annotation to summary rows [first_row, last_row] of
/// its document, replacing the default broadcast there.
struct RowBinding {
  std::string source_id;
  int first_row = 0;
  int last_row = 0;

  friend bool operator==(const RowBinding&, const RowBinding&) = default;
};

struct BroadcastOverride {
  std::vector<RowBinding> points;
  std::vector<RowBinding> annotations;

  friend bool operator==(const BroadcastOverride&, const BroadcastOverride&) = default;
};

struct FileArtifacts {
  std::vector<TableArtifact> tables;  // stacked in this order
  std::vector<Annotation> annotations;
  std::vector<GeoPoint> points;  // first one broadcasts
  BroadcastOverride override_;
};

/// Confirmed tables only. A table without a recognizable header row is
/// skipped with a NoHeaderRowFound warning.
SummaryTable integrate_file(const DocumentRecord& doc, const FileArtifacts& artifacts, const ProjectSchema& schema);

/// Throws SchemaMismatch when a summary's headers differ from the schema.
SummaryTable integrate_project(const std::vector<SummaryTable>& files, const ProjectSchema& schema);

std::string export_csv(const SummaryTable& table);
/// One row per non-empty cell: row, header, doc_id, source_kind, source_id.
std::string provenance_csv(const SummaryTable& table);

std::string to_string(SourceKind k);
SourceKind source_kind_from_string(const std::string& s);

void to_json(nlohmann::json& j, const ProjectSchema& s);
void from_json(const nlohmann::json& j, ProjectSchema& s);
void to_json(nlohmann::json& j, const Provenance& p);
void from_json(const nlohmann::json& j, Provenance& p);
void to_json(nlohmann::json& j, const IntegrationWarning& w);
void from_json(const nlohmann::json& j, IntegrationWarning& w);
void to_json(nlohmann::json& j, const SummaryTable& t);
void from_json(const nlohmann::json& j, SummaryTable& t);
void to_json(nlohmann::json& j, const RowBinding& b);
void from_json(const nlohmann::json& j, RowBinding& b);
void to_json(nlohmann::json& j, const BroadcastOverride& o);
void from_json(const nlohmann::json& j, BroadcastOverride& o);

}  // namespace quarry
