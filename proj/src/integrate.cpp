#include "quarry/integrate.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "quarry/csv.hpp"
#include "quarry/error.hpp"
#include "quarry/text.hpp"

namespace quarry {

namespace {

const std::set<std::string> kMetaFields = {"title", "authors", "venue", "year", "abstract"};
const std::set<std::string> kMapFields = {"longitude", "latitude"};

bool closes(char32_t c) { return c == U')' || c == U']'; }
char32_t opener(char32_t c) { return c == U')' ? U'(' : U'['; }

std::u32string strip_unit_suffixes(std::u32string s) {
  for (;;) {
    while (!s.empty() && text::is_space(s.back())) s.pop_back();
    if (s.empty() || !closes(s.back())) return s;
    auto open = s.rfind(opener(s.back()));
    if (open == std::u32string::npos || open == 0) return s;
    s.erase(open);
  }
}

std::string meta_value(const MetaInfo& m, const std::string& field) {
  if (field == "title") return m.title;
  if (field == "venue") return m.venue;
  if (field == "abstract") return m.abstract;
  if (field == "year") return m.year ? std::to_string(*m.year) : "";
  std::string out;
  for (const auto& a : m.authors) out += (out.empty() ? "" : "; ") + a;
  return out;
}

int header_index(const ProjectSchema& schema, const std::string& header) {
  auto it = std::find(schema.headers.begin(), schema.headers.end(), header);
  return static_cast<int>(it - schema.headers.begin());
}

struct Broadcast {
  int column;
  std::string value;
  Provenance source;
};

void fill(SummaryTable& t, std::size_t row, const Broadcast& b) {
  if (b.value.empty() || !t.rows[row][b.column].empty()) return;
  t.rows[row][b.column] = b.value;
  t.provenance[row][b.column] = b.source;
}

bool in_range(const RowBinding& b, std::size_t row) {
  return static_cast<int>(row) >= b.first_row && static_cast<int>(row) <= b.last_row;
}

void append_table(SummaryTable& out, const DocumentRecord& doc, const TableArtifact& table,
                  const ProjectSchema& schema) {
  auto matrix = export_table(table);
  std::size_t header_row = matrix.size();
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    int filled = 0, matched = 0;
    for (const auto& cell : matrix[r]) {
      if (text::trim(cell).empty()) continue;
      ++filled;
      if (match_header(cell, schema)) ++matched;
    }
    if (filled > 0 && 2 * matched > filled) {
      header_row = r;
      break;
    }
  }
  if (header_row == matrix.size()) {
    out.warnings.push_back({doc.doc_id, table.table_id, std::string(to_string(ErrorCode::NoHeaderRowFound)),
                            "no row of table " + table.table_id + " matches the project headers"});
    return;
  }

  std::vector<int> target(matrix[header_row].size(), -1);
  std::set<int> used;
  for (std::size_t c = 0; c < target.size(); ++c) {
    auto h = match_header(matrix[header_row][c], schema);
    if (!h) continue;
    int col = header_index(schema, *h);
    if (used.insert(col).second) target[c] = col;
  }

  for (std::size_t r = header_row + 1; r < matrix.size(); ++r) {
    std::vector<std::string> row(schema.headers.size());
    std::vector<std::optional<Provenance>> prov(schema.headers.size());
    bool any = false;
    for (std::size_t c = 0; c < target.size(); ++c) {
      if (target[c] < 0 || matrix[r][c].empty()) continue;
      row[target[c]] = matrix[r][c];
      prov[target[c]] = Provenance{doc.doc_id, SourceKind::table, table.table_id};
      any = true;
    }
    if (!any) continue;
    out.rows.push_back(std::move(row));
    out.provenance.push_back(std::move(prov));
  }
}

}  // namespace

void validate_schema(const ProjectSchema& schema) {
  if (schema.headers.empty()) throw Error(ErrorCode::NoHeaders, "project schema has no headers");
  std::set<std::string> seen;
  for (const auto& h : schema.headers) {
    auto n = normalize_header(h);
    if (n.empty()) throw Error(ErrorCode::InvalidArgument, "header '" + h + "' is empty after normalization");
    if (!seen.insert(n).second)
      throw Error(ErrorCode::InvalidArgument, "headers collide after normalization: '" + h + "'", {{"header", h}});
  }
  auto exists = [&](const std::string& h) {
    return std::find(schema.headers.begin(), schema.headers.end(), h) != schema.headers.end();
  };
  auto check_targets = [&](const std::map<std::string, std::string>& m, const char* what) {
    for (const auto& [k, h] : m)
      if (!exists(h))
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " '" + k + "' targets unknown header '" + h + "'",
                    {{"key", k}, {"header", h}});
  };
  check_targets(schema.aliases, "alias");
  check_targets(schema.label_to_header, "label");
  check_targets(schema.meta_to_header, "meta field");
  check_targets(schema.map_to_header, "map field");
  for (const auto& [k, h] : schema.meta_to_header)
    if (!kMetaFields.count(k)) throw Error(ErrorCode::InvalidArgument, "unknown meta field '" + k + "'", {{"key", k}});
  for (const auto& [k, h] : schema.map_to_header)
    if (!kMapFields.count(k)) throw Error(ErrorCode::InvalidArgument, "unknown map field '" + k + "'", {{"key", k}});
}

std::string normalize_header(std::string_view s) {
  auto cps = strip_unit_suffixes(text::decode_utf8(s));
  std::u32string kept;
  for (char32_t c : cps) {
    if (text::is_space(c))
      kept += U' ';
    else if (text::is_word_char(c))
      kept += text::fold(c);
  }
  return text::collapse_whitespace(text::encode_utf8(kept));
}

std::optional<std::string> match_header(std::string_view candidate, const ProjectSchema& schema) {
  auto n = normalize_header(candidate);
  if (n.empty()) return std::nullopt;
  for (const auto& h : schema.headers)
    if (normalize_header(h) == n) return h;
  for (const auto& [alias, h] : schema.aliases)
    if (normalize_header(alias) == n) return h;
  return std::nullopt;
}

SummaryTable integrate_file(const DocumentRecord& doc, const FileArtifacts& artifacts, const ProjectSchema& schema) {
  validate_schema(schema);
  if (doc.status != DocStatus::ready)
    throw Error(ErrorCode::InvalidArgument, "document " + doc.doc_id + " is not ready", {{"doc_id", doc.doc_id}});

  SummaryTable out;
  out.level = SummaryLevel::file;
  out.headers = schema.headers;

  for (const auto& t : artifacts.tables) {
    if (t.stage != TableStage::confirmed) {
      out.warnings.push_back({doc.doc_id, t.table_id, "TableNotConfirmed",
                              "table " + t.table_id + " is at stage " + to_string(t.stage) + " and was left out"});
      continue;
    }
    append_table(out, doc, t, schema);
  }
  if (out.rows.empty()) {
    out.rows.emplace_back(schema.headers.size());
    out.provenance.emplace_back(schema.headers.size());
  }

  std::vector<Broadcast> constant;
  for (const auto& [field, header] : schema.meta_to_header)
    constant.push_back({header_index(schema, header), meta_value(doc.meta, field),
                        Provenance{doc.doc_id, SourceKind::meta, field}});

  auto annotations = artifacts.annotations;
  std::stable_sort(annotations.begin(), annotations.end(), [](const Annotation& a, const Annotation& b) {
    return std::tie(a.page_index, a.start, a.end) < std::tie(b.page_index, b.start, b.end);
  });
  auto annotation_value = [&](const Annotation& a, const std::string& header) {
    return Broadcast{header_index(schema, header), a.surface_text, Provenance{doc.doc_id, SourceKind::text, a.annotation_id}};
  };
  for (const auto& [label, header] : schema.label_to_header) {
    auto it = std::find_if(annotations.begin(), annotations.end(), [&](const Annotation& a) { return a.label_id == label; });
    if (it != annotations.end()) constant.push_back(annotation_value(*it, header));
  }

  auto point_values = [&](const GeoPoint& p) {
    std::vector<Broadcast> v;
    for (const auto& [field, header] : schema.map_to_header)
      v.push_back({header_index(schema, header), csv::number(field == "longitude" ? p.longitude : p.latitude),
                   Provenance{doc.doc_id, SourceKind::map, p.point_id}});
    return v;
  };
  std::vector<Broadcast> default_point;
  if (!artifacts.points.empty()) default_point = point_values(artifacts.points.front());

  std::vector<std::pair<RowBinding, std::vector<Broadcast>>> point_bindings, annotation_bindings;
  for (const auto& b : artifacts.override_.points) {
    auto it = std::find_if(artifacts.points.begin(), artifacts.points.end(),
                           [&](const GeoPoint& p) { return p.point_id == b.source_id; });
    if (it == artifacts.points.end())
      throw Error(ErrorCode::NotFound, "no geo point '" + b.source_id + "' in document " + doc.doc_id,
                  {{"point_id", b.source_id}});
    point_bindings.emplace_back(b, point_values(*it));
  }
  for (const auto& b : artifacts.override_.annotations) {
    auto it = std::find_if(annotations.begin(), annotations.end(),
                           [&](const Annotation& a) { return a.annotation_id == b.source_id; });
    if (it == annotations.end())
      throw Error(ErrorCode::NotFound, "no annotation '" + b.source_id + "' in document " + doc.doc_id,
                  {{"annotation_id", b.source_id}});
    auto h = schema.label_to_header.find(it->label_id);
    if (h == schema.label_to_header.end()) continue;
    annotation_bindings.emplace_back(b, std::vector<Broadcast>{annotation_value(*it, h->second)});
  }

  // bound values first so the defaults only fill what they left
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    for (const auto& [b, values] : annotation_bindings)
      if (in_range(b, r))
        for (const auto& v : values) fill(out, r, v);
    for (const auto& [b, values] : point_bindings)
      if (in_range(b, r))
        for (const auto& v : values) fill(out, r, v);
    for (const auto& v : constant) fill(out, r, v);
    for (const auto& v : default_point) fill(out, r, v);
  }
  return out;
}

SummaryTable integrate_project(const std::vector<SummaryTable>& files, const ProjectSchema& schema) {
  validate_schema(schema);
  SummaryTable out;
  out.level = SummaryLevel::project;
  out.headers = schema.headers;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto& f = files[i];
    if (f.headers != schema.headers)
      throw Error(ErrorCode::SchemaMismatch, "file summary " + std::to_string(i) + " has different headers",
                  {{"index", i}, {"headers", f.headers}, {"expected", schema.headers}});
    out.rows.insert(out.rows.end(), f.rows.begin(), f.rows.end());
    out.provenance.insert(out.provenance.end(), f.provenance.begin(), f.provenance.end());
    out.warnings.insert(out.warnings.end(), f.warnings.begin(), f.warnings.end());
  }
  return out;
}

std::string export_csv(const SummaryTable& table) {
  csv::Rows rows;
  rows.push_back(table.headers);
  rows.insert(rows.end(), table.rows.begin(), table.rows.end());
  return csv::write(rows);
}

std::string provenance_csv(const SummaryTable& table) {
  csv::Rows rows = {{"row", "header", "doc_id", "source_kind", "source_id"}};
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
      if (table.rows[r][c].empty()) continue;
      const auto& p = table.provenance[r][c];
      rows.push_back({std::to_string(r), table.headers[c], p ? p->doc_id : "", p ? to_string(p->kind) : "",
                      p ? p->source_id : ""});
    }
  return csv::write(rows);
}

std::string to_string(SourceKind k) {
  switch (k) {
    case SourceKind::table: return "table";
    case SourceKind::meta: return "meta";
    case SourceKind::text: return "text";
    case SourceKind::map: return "map";
  }
  return "table";
}

SourceKind source_kind_from_string(const std::string& s) {
  if (s == "table") return SourceKind::table;
  if (s == "meta") return SourceKind::meta;
  if (s == "text") return SourceKind::text;
  if (s == "map") return SourceKind::map;
  throw Error(ErrorCode::InvalidArgument, "unknown source kind '" + s + "'");
}

void to_json(nlohmann::json& j, const ProjectSchema& s) {
  j = {{"headers", s.headers},
       {"aliases", s.aliases},
       {"label_to_header", s.label_to_header},
       {"meta_to_header", s.meta_to_header},
       {"map_to_header", s.map_to_header}};
}

void from_json(const nlohmann::json& j, ProjectSchema& s) {
  using M = std::map<std::string, std::string>;
  s.headers = j.value("headers", std::vector<std::string>{});
  s.aliases = j.value("aliases", M{});
  s.label_to_header = j.value("label_to_header", M{});
  s.meta_to_header = j.value("meta_to_header", M{});
  s.map_to_header = j.value("map_to_header", M{});
}

void to_json(nlohmann::json& j, const Provenance& p) {
  j = {{"doc_id", p.doc_id}, {"source_kind", to_string(p.kind)}, {"source_id", p.source_id}};
}

void from_json(const nlohmann::json& j, Provenance& p) {
  p.doc_id = j.at("doc_id").get<std::string>();
  p.kind = source_kind_from_string(j.at("source_kind").get<std::string>());
  p.source_id = j.at("source_id").get<std::string>();
}

void to_json(nlohmann::json& j, const IntegrationWarning& w) {
  j = {{"doc_id", w.doc_id}, {"source_id", w.source_id}, {"code", w.code}, {"message", w.message}};
}

void from_json(const nlohmann::json& j, IntegrationWarning& w) {
  w.doc_id = j.value("doc_id", "");
  w.source_id = j.value("source_id", "");
  w.code = j.value("code", "");
  w.message = j.value("message", "");
}

void to_json(nlohmann::json& j, const SummaryTable& t) {
  auto prov = nlohmann::json::array();
  for (const auto& row : t.provenance) {
    auto r = nlohmann::json::array();
    for (const auto& p : row) r.push_back(p ? nlohmann::json(*p) : nlohmann::json(nullptr));
    prov.push_back(std::move(r));
  }
  j = {{"level", t.level == SummaryLevel::project ? "project" : "file"},
       {"headers", t.headers},
       {"rows", t.rows},
       {"provenance", std::move(prov)},
       {"warnings", t.warnings}};
}

void from_json(const nlohmann::json& j, SummaryTable& t) {
  t.level = j.value("level", "file") == "project" ? SummaryLevel::project : SummaryLevel::file;
  t.headers = j.at("headers").get<std::vector<std::string>>();
  t.rows = j.at("rows").get<std::vector<std::vector<std::string>>>();
  t.provenance.clear();
  for (const auto& row : j.value("provenance", nlohmann::json::array())) {
    std::vector<std::optional<Provenance>> r;
    for (const auto& p : row) r.push_back(p.is_null() ? std::nullopt : std::optional<Provenance>(p.get<Provenance>()));
    t.provenance.push_back(std::move(r));
  }
  t.warnings = j.value("warnings", std::vector<IntegrationWarning>{});
}

void to_json(nlohmann::json& j, const RowBinding& b) {
  j = {{"source_id", b.source_id}, {"rows", {b.first_row, b.last_row}}};
}

void from_json(const nlohmann::json& j, RowBinding& b) {
  b.source_id = j.at("source_id").get<std::string>();
  b.first_row = j.at("rows").at(0).get<int>();
  b.last_row = j.at("rows").at(1).get<int>();
}

void to_json(nlohmann::json& j, const BroadcastOverride& o) { j = {{"points", o.points}, {"annotations", o.annotations}}; }

void from_json(const nlohmann::json& j, BroadcastOverride& o) {
  o.points = j.value("points", std::vector<RowBinding>{});
  o.annotations = j.value("annotations", std::vector<RowBinding>{});
}

}  // namespace quarry
