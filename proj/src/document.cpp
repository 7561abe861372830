#include "quarry/document.hpp"

#include <algorithm>
#include <regex>

#include "quarry/error.hpp"
#include "quarry/text.hpp"

namespace quarry {

namespace {

bool blank(const std::optional<std::string>& s) { return !s || text::trim(*s).empty(); }

std::vector<std::string> split_authors(const std::string& line) {
  static const std::regex separators(R"(\s*(?:,|;|&|\band\b)\s*)", std::regex::icase);
  std::vector<std::string> out;
  std::sregex_token_iterator it(line.begin(), line.end(), separators, -1), end;
  for (; it != end; ++it) {
    std::string name = it->str();
    // Drop affiliation markers such as trailing digits or asterisks.
    while (!name.empty() && (std::isdigit(static_cast<unsigned char>(name.back())) || name.back() == '*' ||
                             name.back() == ' ' || name.back() == ','))
      name.pop_back();
    name = text::collapse_whitespace(name);
    if (!name.empty()) out.push_back(name);
  }
  return out;
}

double line_size(const std::vector<TextBox>& line) {
  double s = 0;
  for (const auto& b : line) s = std::max(s, b.font_size_pt);
  return s;
}

double line_top(const std::vector<TextBox>& line) {
  double y = line.front().bbox.y1;
  for (const auto& b : line) y = std::max(y, b.bbox.y1);
  return y;
}

double line_bottom(const std::vector<TextBox>& line) {
  double y = line.front().bbox.y0;
  for (const auto& b : line) y = std::min(y, b.bbox.y0);
  return y;
}

std::string line_string(const std::vector<TextBox>& line) {
  std::string out;
  for (const auto& b : line) {
    if (!out.empty()) out.push_back(' ');
    out += b.text;
  }
  return out;
}

}  // namespace

std::vector<std::vector<TextBox>> reading_lines(std::vector<TextBox> boxes) {
  std::stable_sort(boxes.begin(), boxes.end(), [](const TextBox& a, const TextBox& b) {
    if (a.bbox.y1 != b.bbox.y1) return a.bbox.y1 > b.bbox.y1;
    return a.bbox.x0 < b.bbox.x0;
  });
  std::vector<std::vector<TextBox>> lines;
  for (auto& box : boxes) {
    if (!lines.empty()) {
      const BBox& anchor = lines.back().front().bbox;
      double cy = box.bbox.center_y();
      if (cy >= anchor.y0 && cy <= anchor.y1) {
        lines.back().push_back(std::move(box));
        continue;
      }
    }
    lines.push_back({std::move(box)});
  }
  for (auto& line : lines)
    std::stable_sort(line.begin(), line.end(),
                     [](const TextBox& a, const TextBox& b) { return a.bbox.x0 < b.bbox.x0; });
  return lines;
}

std::vector<TextBox> reading_order(std::vector<TextBox> boxes) {
  std::vector<TextBox> out;
  out.reserve(boxes.size());
  for (auto& line : reading_lines(std::move(boxes)))
    for (auto& b : line) out.push_back(std::move(b));
  return out;
}

std::string page_text(const PageContent& page) {
  std::string out;
  bool first_line = true;
  for (const auto& line : reading_lines(page.text_boxes)) {
    if (!first_line) out.push_back('\n');
    first_line = false;
    out += line_string(line);
  }
  return out;
}

std::vector<TextBox> get_page_text(const DocumentRecord& doc, int page_index) {
  if (page_index < 0 || page_index >= static_cast<int>(doc.pages.size()))
    throw Error(ErrorCode::PageOutOfRange, "page " + std::to_string(page_index) + " out of range",
                {{"page_count", doc.page_count}});
  return reading_order(doc.pages[page_index].text_boxes);
}

MetaCandidate LayoutHeuristicAdapter::extract(const AdapterInput& input) const {
  MetaCandidate c;
  c.adapter_id = id();
  if (input.pages.empty()) return c;
  auto lines = reading_lines(input.pages.front().text_boxes);
  if (lines.empty()) return c;

  double max_size = 0;
  for (const auto& l : lines) max_size = std::max(max_size, line_size(l));
  std::size_t i = 0;
  while (i < lines.size() && line_size(lines[i]) < max_size - 0.5) ++i;
  std::string title = line_string(lines[i]);
  ++i;
  while (i < lines.size() && std::abs(line_size(lines[i]) - max_size) <= 0.5) {
    title += " " + line_string(lines[i]);
    ++i;
  }
  c.title = text::collapse_whitespace(title);

  std::vector<std::string> authors;
  if (i < lines.size()) {
    double size = line_size(lines[i]);
    double gap = line_bottom(lines[i - 1]) - line_top(lines[i]);
    if (size < max_size && gap < 2.5 * size) {
      auto names = split_authors(line_string(lines[i]));
      authors.insert(authors.end(), names.begin(), names.end());
      ++i;
      while (i < lines.size()) {
        double s = line_size(lines[i]);
        if (line_bottom(lines[i - 1]) - line_top(lines[i]) >= 1.0 * s) break;
        if (text::comparison_key(line_string(lines[i])).rfind("abstract", 0) == 0) break;
        names = split_authors(line_string(lines[i]));
        authors.insert(authors.end(), names.begin(), names.end());
        ++i;
      }
    }
  }
  if (!authors.empty()) c.authors = authors;

  for (std::size_t k = 0; k < lines.size(); ++k) {
    std::string s = line_string(lines[k]);
    if (text::comparison_key(s).rfind("abstract", 0) != 0) continue;
    std::string body = s.substr(8);
    while (!body.empty() && (body.front() == ':' || body.front() == '.' || body.front() == ' ' ||
                             body.front() == '-'))
      body.erase(body.begin());
    for (std::size_t n = k + 1; n < lines.size(); ++n) {
      double sz = line_size(lines[n]);
      if (line_bottom(lines[n - 1]) - line_top(lines[n]) >= 1.0 * sz) break;
      body += " " + line_string(lines[n]);
    }
    body = text::collapse_whitespace(body);
    if (!body.empty()) c.abstract = body;
    break;
  }
  return c;
}

MetaCandidate PdfInfoAdapter::extract(const AdapterInput& input) const {
  MetaCandidate c;
  c.adapter_id = id();
  auto get = [&](const char* key) -> std::optional<std::string> {
    auto it = input.info.find(key);
    if (it == input.info.end()) return std::nullopt;
    std::string v = text::collapse_whitespace(it->second);
    std::string folded = text::comparison_key(v);
    // Producers fill these with placeholders more often than with real data.
    if (v.empty() || folded == "(unspecified)" || folded == "untitled" || folded == "unknown" ||
        folded == "anonymous" || folded.rfind("microsoft word - ", 0) == 0)
      return std::nullopt;
    return v;
  };
  c.title = get("Title");
  if (auto a = get("Author")) {
    auto names = split_authors(*a);
    if (!names.empty()) c.authors = names;
  }
  c.abstract = get("Subject");
  c.venue = get("Venue");
  if (auto y = get("Year")) {
    try {
      c.year = std::stoi(*y);
    } catch (const std::exception&) {
    }
  }
  return c;
}

MetaRegistry MetaRegistry::baseline() {
  MetaRegistry r;
  r.add(std::make_shared<LayoutHeuristicAdapter>());
  r.add(std::make_shared<PdfInfoAdapter>());
  return r;
}

std::vector<std::string> MetaRegistry::priority() const {
  std::vector<std::string> out;
  for (const auto& a : adapters_) out.push_back(a->id());
  return out;
}

namespace {

/// Picks the modal key; ties go to the group holding the earliest-priority
/// adapter. Returns the index into `values` of the winning representative.
template <typename Key>
std::optional<std::size_t> modal(const std::vector<std::pair<std::size_t, Key>>& keyed) {
  if (keyed.empty()) return std::nullopt;
  std::optional<std::size_t> best;
  std::size_t best_count = 0, best_rank = 0;
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    std::size_t count = 0, rank = keyed[i].first;
    std::size_t rep = i;
    for (std::size_t k = 0; k < keyed.size(); ++k) {
      if (!(keyed[k].second == keyed[i].second)) continue;
      ++count;
      if (keyed[k].first < rank) {
        rank = keyed[k].first;
        rep = k;
      }
    }
    if (!best || count > best_count || (count == best_count && rank < best_rank)) {
      best = rep;
      best_count = count;
      best_rank = rank;
    }
  }
  return best;
}

}  // namespace

MetaInfo vote_fields(const std::vector<MetaCandidate>& candidates, const std::vector<std::string>& priority) {
  std::vector<std::size_t> rank(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto it = std::find(priority.begin(), priority.end(), candidates[i].adapter_id);
    if (it == priority.end())
      throw Error(ErrorCode::UnknownAdapter, "adapter '" + candidates[i].adapter_id + "' has no priority",
                  {{"adapter_id", candidates[i].adapter_id}});
    rank[i] = static_cast<std::size_t>(it - priority.begin());
  }

  MetaInfo out;
  auto vote_string = [&](auto member) -> std::string {
    std::vector<std::pair<std::size_t, std::string>> keyed;
    std::vector<const std::string*> raw;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto& v = candidates[i].*member;
      if (blank(v)) continue;
      keyed.push_back({rank[i], text::comparison_key(*v)});
      raw.push_back(&*v);
    }
    auto win = modal(keyed);
    return win ? text::collapse_whitespace(*raw[*win]) : std::string{};
  };
  out.title = vote_string(&MetaCandidate::title);
  out.venue = vote_string(&MetaCandidate::venue);
  out.abstract = vote_string(&MetaCandidate::abstract);

  {
    std::vector<std::pair<std::size_t, std::vector<std::string>>> keyed;
    std::vector<std::vector<std::string>> raw;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!candidates[i].authors) continue;
      std::vector<std::string> names, keys;
      for (const auto& a : *candidates[i].authors) {
        std::string n = text::collapse_whitespace(a);
        if (n.empty()) continue;
        keys.push_back(text::comparison_key(n));
        names.push_back(n);
      }
      if (names.empty()) continue;
      keyed.push_back({rank[i], keys});
      raw.push_back(names);
    }
    if (auto win = modal(keyed)) out.authors = raw[*win];
  }
  {
    std::vector<std::pair<std::size_t, int>> keyed;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      auto y = candidates[i].year;
      if (y && *y >= 1500 && *y <= 2100) keyed.push_back({rank[i], *y});
    }
    if (auto win = modal(keyed)) out.year = keyed[*win].second;
  }
  return out;
}

MetaInfo extract_meta(const DocumentRecord& doc, std::span<const std::uint8_t> pdf_bytes,
                      const MetaRegistry& registry) {
  if (registry.empty()) throw Error(ErrorCode::NoAdapters, "no meta adapters registered");
  std::map<std::string, std::string> info;
  try {
    info = pdf::parse(pdf_bytes).info;
  } catch (const Error&) {
  }
  AdapterInput input{pdf_bytes, doc.pages, info};
  std::vector<MetaCandidate> candidates;
  for (const auto& adapter : registry.adapters()) {
    try {
      auto c = adapter->extract(input);
      c.adapter_id = adapter->id();
      candidates.push_back(std::move(c));
    } catch (const std::exception&) {
      // a failing adapter just drops out of the vote
    }
  }
  if (candidates.empty()) return {};
  return vote_fields(candidates, registry.priority());
}

std::vector<PageContent> pages_from_pdf(const pdf::File& file) {
  std::vector<PageContent> pages;
  for (std::size_t i = 0; i < file.pages.size(); ++i) {
    const auto& src = file.pages[i];
    PageContent page;
    page.page_index = static_cast<int>(i);
    page.width_pt = src.width;
    page.height_pt = src.height;
    for (const auto& run : src.runs) {
      if (run.text.empty() || !run.bbox.valid()) continue;
      page.text_boxes.push_back({run.bbox, run.text, run.font_size});
    }
    page.ruling_segments = src.rulings;
    pages.push_back(std::move(page));
  }
  return pages;
}

DocumentRecord ingest_document(std::span<const std::uint8_t> pdf_bytes, const IngestContext& ctx) {
  pdf::File file = pdf::parse(pdf_bytes, ctx.parse_options);
  DocumentRecord doc;
  doc.doc_id = ctx.doc_id;
  doc.project_id = ctx.project_id;
  doc.import_user = ctx.user;
  doc.import_time = ctx.now;
  doc.pages = pages_from_pdf(file);
  doc.page_count = static_cast<int>(doc.pages.size());
  doc.status = DocStatus::ready;
  if (ctx.registry && !ctx.registry->empty()) doc.meta = extract_meta(doc, pdf_bytes, *ctx.registry);
  return doc;
}

std::string to_string(DocStatus s) {
  switch (s) {
    case DocStatus::parsing: return "parsing";
    case DocStatus::ready: return "ready";
    case DocStatus::failed: return "failed";
  }
  return "failed";
}

DocStatus doc_status_from_string(const std::string& s) {
  if (s == "parsing") return DocStatus::parsing;
  if (s == "ready") return DocStatus::ready;
  return DocStatus::failed;
}

void to_json(nlohmann::json& j, const BBox& b) { j = nlohmann::json::array({b.x0, b.y0, b.x1, b.y1}); }
void from_json(const nlohmann::json& j, BBox& b) {
  b = {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}
void to_json(nlohmann::json& j, const Segment& s) { j = nlohmann::json::array({s.x0, s.y0, s.x1, s.y1}); }
void from_json(const nlohmann::json& j, Segment& s) {
  s = {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}

void to_json(nlohmann::json& j, const TextBox& t) {
  j = {{"bbox", t.bbox}, {"text", t.text}, {"font_size_pt", t.font_size_pt}};
}
void from_json(const nlohmann::json& j, TextBox& t) {
  t.bbox = j.at("bbox").get<BBox>();
  t.text = j.at("text").get<std::string>();
  t.font_size_pt = j.at("font_size_pt").get<double>();
}

void to_json(nlohmann::json& j, const PageContent& p) {
  j = {{"page_index", p.page_index},
       {"width_pt", p.width_pt},
       {"height_pt", p.height_pt},
       {"text_boxes", p.text_boxes},
       {"ruling_segments", p.ruling_segments}};
}
void from_json(const nlohmann::json& j, PageContent& p) {
  p.page_index = j.at("page_index").get<int>();
  p.width_pt = j.at("width_pt").get<double>();
  p.height_pt = j.at("height_pt").get<double>();
  p.text_boxes = j.at("text_boxes").get<std::vector<TextBox>>();
  p.ruling_segments = j.at("ruling_segments").get<std::vector<Segment>>();
}

void to_json(nlohmann::json& j, const MetaInfo& m) {
  j = {{"title", m.title}, {"authors", m.authors}, {"venue", m.venue}, {"abstract", m.abstract}};
  j["year"] = m.year ? nlohmann::json(*m.year) : nlohmann::json(nullptr);
}
void from_json(const nlohmann::json& j, MetaInfo& m) {
  m.title = j.value("title", "");
  m.authors = j.value("authors", std::vector<std::string>{});
  m.venue = j.value("venue", "");
  m.abstract = j.value("abstract", "");
  if (j.contains("year") && j["year"].is_number_integer()) m.year = j["year"].get<int>();
  else m.year.reset();
}

namespace {
nlohmann::json opt(const std::optional<std::string>& s) { return s ? nlohmann::json(*s) : nlohmann::json(nullptr); }
nlohmann::json opt(const std::optional<Timestamp>& t) {
  return t ? nlohmann::json(format_rfc3339(*t)) : nlohmann::json(nullptr);
}
}  // namespace

void to_json(nlohmann::json& j, const DocumentRecord& d) {
  j = {{"doc_id", d.doc_id},
       {"project_id", d.project_id},
       {"page_count", d.page_count},
       {"pages", d.pages},
       {"meta", d.meta},
       {"import_user", d.import_user},
       {"import_time", format_rfc3339(d.import_time)},
       {"last_editor", opt(d.last_editor)},
       {"last_edit_time", opt(d.last_edit_time)},
       {"principal", opt(d.principal)},
       {"status", to_string(d.status)}};
}

void from_json(const nlohmann::json& j, DocumentRecord& d) {
  d.doc_id = j.at("doc_id").get<std::string>();
  d.project_id = j.at("project_id").get<std::string>();
  d.page_count = j.at("page_count").get<int>();
  d.pages = j.at("pages").get<std::vector<PageContent>>();
  d.meta = j.at("meta").get<MetaInfo>();
  d.import_user = j.at("import_user").get<std::string>();
  d.import_time = parse_rfc3339(j.at("import_time").get<std::string>()).value_or(Timestamp{});
  auto ostr = [&](const char* k) -> std::optional<std::string> {
    if (!j.contains(k) || j[k].is_null()) return std::nullopt;
    return j[k].get<std::string>();
  };
  d.last_editor = ostr("last_editor");
  if (auto t = ostr("last_edit_time")) d.last_edit_time = parse_rfc3339(*t);
  d.principal = ostr("principal");
  d.status = doc_status_from_string(j.value("status", "ready"));
}

}  // namespace quarry
