#include "quarry/annotate.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>
#include <tuple>

#include "quarry/csv.hpp"
#include "quarry/error.hpp"
#include "quarry/text.hpp"

namespace quarry {

namespace {

bool valid_color(const std::string& c) {
  static const std::regex hex("^#([0-9a-fA-F]{3}|[0-9a-fA-F]{6})$");
  return std::regex_match(c, hex);
}

std::u32string normalized_term(const std::string& term) {
  return text::fold(text::decode_utf8(text::collapse_whitespace(term)));
}

}  // namespace

void validate_labels(const std::vector<LabelDef>& labels) {
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (l.label_id.empty()) throw Error(ErrorCode::InvalidArgument, "label id must not be empty");
    if (!seen.insert(l.label_id).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate label id '" + l.label_id + "'", {{"label_id", l.label_id}});
    if (!valid_color(l.color))
      throw Error(ErrorCode::InvalidArgument, "label colour must be #rgb or #rrggbb", {{"label_id", l.label_id}});
    for (const auto& m : l.matchers) {
      if (m.kind != MatcherKind::dictionary) continue;
      bool any = std::any_of(m.terms.begin(), m.terms.end(),
                             [](const std::string& t) { return !text::trim(t).empty(); });
      if (!any)
        throw Error(ErrorCode::InvalidArgument, "dictionary for '" + l.label_id + "' is empty",
                    {{"label_id", l.label_id}});
    }
  }
}

struct CompiledLabelSet::Impl {
  struct Node {
    std::map<char32_t, int> next;
    std::vector<std::size_t> labels;
  };
  std::vector<Node> trie{Node{}};
  std::vector<std::pair<std::wregex, std::size_t>> regexes;

  void insert(const std::u32string& term, std::size_t label) {
    int node = 0;
    for (char32_t c : term) {
      auto it = trie[node].next.find(c);
      if (it == trie[node].next.end()) {
        trie.push_back({});
        int id = static_cast<int>(trie.size()) - 1;
        trie[node].next.emplace(c, id);
        node = id;
      } else {
        node = it->second;
      }
    }
    auto& ls = trie[node].labels;
    if (std::find(ls.begin(), ls.end(), label) == ls.end()) ls.push_back(label);
  }
};

CompiledLabelSet::CompiledLabelSet() : impl_(std::make_unique<Impl>()) {}
CompiledLabelSet::~CompiledLabelSet() = default;
CompiledLabelSet::CompiledLabelSet(CompiledLabelSet&&) noexcept = default;
CompiledLabelSet& CompiledLabelSet::operator=(CompiledLabelSet&&) noexcept = default;

CompiledLabelSet compile_labelset(const std::vector<LabelDef>& labels) {
  validate_labels(labels);
  CompiledLabelSet set;
  set.labels_ = labels;
  for (std::size_t li = 0; li < labels.size(); ++li) {
    for (const auto& m : labels[li].matchers) {
      if (m.kind == MatcherKind::dictionary) {
        for (const auto& term : m.terms) {
          auto t = normalized_term(term);
          if (!t.empty()) set.impl_->insert(t, li);
        }
      } else {
        auto w = text::decode_utf8(m.pattern);
        try {
          set.impl_->regexes.emplace_back(
              std::wregex(std::wstring(w.begin(), w.end()), std::regex::ECMAScript | std::regex::icase), li);
        } catch (const std::regex_error& e) {
          throw Error(ErrorCode::InvalidPattern, "invalid pattern for '" + labels[li].label_id + "': " + e.what(),
                      {{"label_id", labels[li].label_id}, {"pattern", m.pattern}});
        }
      }
    }
  }
  return set;
}

std::vector<TextMatch> CompiledLabelSet::find(std::u32string_view text) const {
  std::vector<TextMatch> cand;
  const std::size_t n = text.size();
  std::u32string folded = text::fold(text);
  auto word = [&](std::size_t i) { return text::is_word_char(text[i]); };

  const auto& trie = impl_->trie;
  if (trie.size() > 1) {
    for (std::size_t s = 0; s < n; ++s) {
      if (s > 0 && word(s - 1) && word(s)) continue;
      int node = 0;
      std::size_t i = s;
      while (i < n) {
        char32_t c = folded[i];
        if (text::is_space(c)) {
          auto it = trie[node].next.find(U' ');
          if (it == trie[node].next.end()) break;
          node = it->second;
          while (i < n && text::is_space(folded[i])) ++i;
          continue;
        }
        auto it = trie[node].next.find(c);
        if (it == trie[node].next.end()) break;
        node = it->second;
        ++i;
        if (!trie[node].labels.empty() && (i == n || !word(i) || !word(i - 1)))
          for (auto li : trie[node].labels) cand.push_back({s, i, li});
      }
    }
  }

  if (!impl_->regexes.empty()) {
    std::wstring w(text.begin(), text.end());
    for (const auto& [re, li] : impl_->regexes) {
      for (auto it = std::wsregex_iterator(w.begin(), w.end(), re); it != std::wsregex_iterator(); ++it) {
        if (it->length(0) == 0) continue;
        auto s = static_cast<std::size_t>(it->position(0));
        cand.push_back({s, s + static_cast<std::size_t>(it->length(0)), li});
      }
    }
  }

  std::sort(cand.begin(), cand.end(), [](const TextMatch& a, const TextMatch& b) {
    std::size_t la = a.end - a.start, lb = b.end - b.start;
    if (la != lb) return la > lb;
    if (a.start != b.start) return a.start < b.start;
    return a.label_index < b.label_index;
  });
  std::vector<bool> taken(n, false);
  std::vector<TextMatch> out;
  for (const auto& m : cand) {
    if (std::any_of(taken.begin() + m.start, taken.begin() + m.end, [](bool b) { return b; })) continue;
    std::fill(taken.begin() + m.start, taken.begin() + m.end, true);
    out.push_back(m);
  }
  std::sort(out.begin(), out.end(), [](const TextMatch& a, const TextMatch& b) { return a.start < b.start; });
  return out;
}

std::vector<Annotation> auto_annotate(const DocumentRecord& doc, const CompiledLabelSet& matchers, Timestamp now) {
  std::vector<Annotation> out;
  for (std::size_t p = 0; p < doc.pages.size(); ++p) {
    auto text = text::decode_utf8(page_text(doc.pages[p]));
    for (const auto& m : matchers.find(text)) {
      Annotation a;
      a.doc_id = doc.doc_id;
      a.page_index = static_cast<int>(p);
      a.start = m.start;
      a.end = m.end;
      a.surface_text = text::encode_utf8(std::u32string_view(text).substr(m.start, m.end - m.start));
      a.label_id = matchers.labels()[m.label_index].label_id;
      a.origin = AnnotationOrigin::auto_;
      a.author = "system";
      a.created_at = now;
      a.annotation_id = "auto-" + std::to_string(p) + "-" + std::to_string(m.start) + "-" + std::to_string(m.end) +
                        "-" + a.label_id;
      out.push_back(std::move(a));
    }
  }
  return out;
}

std::vector<Annotation> replace_auto(const std::vector<Annotation>& existing, const std::vector<Annotation>& fresh) {
  std::vector<Annotation> out;
  for (const auto& a : existing)
    if (a.origin == AnnotationOrigin::manual) out.push_back(a);
  out.insert(out.end(), fresh.begin(), fresh.end());
  return out;
}

Annotation add_manual_annotation(const DocumentRecord& doc, int page_index, std::size_t start, std::size_t end,
                                 const std::string& label_id, const std::vector<LabelDef>& labels,
                                 const std::string& user, Timestamp now, const std::string& annotation_id) {
  if (std::none_of(labels.begin(), labels.end(), [&](const LabelDef& l) { return l.label_id == label_id; }))
    throw Error(ErrorCode::UnknownLabel, "no label '" + label_id + "' in this project", {{"label_id", label_id}});
  if (page_index < 0 || page_index >= static_cast<int>(doc.pages.size()))
    throw Error(ErrorCode::PageOutOfRange, "page " + std::to_string(page_index) + " out of range");
  auto text = text::decode_utf8(page_text(doc.pages[page_index]));
  if (start >= end || end > text.size())
    throw Error(ErrorCode::SpanOutOfRange, "span must satisfy start < end <= page text length",
                {{"start", start}, {"end", end}, {"length", text.size()}});
  Annotation a;
  a.annotation_id = annotation_id;
  a.doc_id = doc.doc_id;
  a.page_index = page_index;
  a.start = start;
  a.end = end;
  a.surface_text = text::encode_utf8(std::u32string_view(text).substr(start, end - start));
  a.label_id = label_id;
  a.origin = AnnotationOrigin::manual;
  a.author = user;
  a.created_at = now;
  return a;
}

std::vector<Annotation> list_annotations(std::vector<Annotation> annotations, const std::vector<LabelDef>& labels,
                                         bool include_hidden) {
  if (!include_hidden) {
    std::set<std::string> hidden;
    for (const auto& l : labels)
      if (!l.visible) hidden.insert(l.label_id);
    std::erase_if(annotations, [&](const Annotation& a) { return hidden.count(a.label_id) > 0; });
  }
  std::stable_sort(annotations.begin(), annotations.end(), [](const Annotation& a, const Annotation& b) {
    return std::tie(a.page_index, a.start, a.end, a.label_id) < std::tie(b.page_index, b.start, b.end, b.label_id);
  });
  return annotations;
}

std::string annotation_mismatch(const DocumentRecord& doc, const Annotation& a) {
  if (a.page_index < 0 || a.page_index >= static_cast<int>(doc.pages.size())) return "page out of range";
  auto text = text::decode_utf8(page_text(doc.pages[a.page_index]));
  if (a.start >= a.end || a.end > text.size()) return "span out of range";
  auto actual = text::encode_utf8(std::u32string_view(text).substr(a.start, a.end - a.start));
  if (actual != a.surface_text) return "surface text '" + a.surface_text + "' differs from page text '" + actual + "'";
  return "";
}

std::string annotations_csv(const std::vector<Annotation>& annotations) {
  csv::Rows rows{{"doc_id", "page", "start", "end", "text", "label", "origin", "author"}};
  for (const auto& a : annotations)
    rows.push_back({a.doc_id, std::to_string(a.page_index), std::to_string(a.start), std::to_string(a.end),
                    a.surface_text, a.label_id, to_string(a.origin), a.author});
  return csv::write(rows);
}

std::string to_string(AnnotationOrigin o) { return o == AnnotationOrigin::manual ? "manual" : "auto"; }

void to_json(nlohmann::json& j, const MatcherDef& m) {
  if (m.kind == MatcherKind::dictionary)
    j = {{"kind", "dictionary"}, {"payload", m.terms}};
  else
    j = {{"kind", "regex"}, {"payload", m.pattern}};
}

void from_json(const nlohmann::json& j, MatcherDef& m) {
  auto kind = j.at("kind").get<std::string>();
  if (kind == "dictionary") {
    m.kind = MatcherKind::dictionary;
    m.terms = j.at("payload").get<std::vector<std::string>>();
  } else if (kind == "regex") {
    m.kind = MatcherKind::regex;
    m.pattern = j.at("payload").get<std::string>();
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown matcher kind '" + kind + "'");
  }
}

void to_json(nlohmann::json& j, const LabelDef& l) {
  j = {{"label_id", l.label_id},
       {"display_name", l.display_name},
       {"color", l.color},
       {"visible", l.visible},
       {"matchers", l.matchers}};
}

void from_json(const nlohmann::json& j, LabelDef& l) {
  l.label_id = j.at("label_id").get<std::string>();
  l.display_name = j.value("display_name", l.label_id);
  l.color = j.value("color", "#888888");
  l.visible = j.value("visible", true);
  l.matchers = j.value("matchers", std::vector<MatcherDef>{});
}

void to_json(nlohmann::json& j, const Annotation& a) {
  j = {{"annotation_id", a.annotation_id},
       {"doc_id", a.doc_id},
       {"page_index", a.page_index},
       {"char_span", {a.start, a.end}},
       {"surface_text", a.surface_text},
       {"label_id", a.label_id},
       {"origin", to_string(a.origin)},
       {"author", a.author},
       {"created_at", format_rfc3339(a.created_at)}};
}

void from_json(const nlohmann::json& j, Annotation& a) {
  a.annotation_id = j.value("annotation_id", "");
  a.doc_id = j.value("doc_id", "");
  a.page_index = j.at("page_index").get<int>();
  a.start = j.at("char_span").at(0).get<std::size_t>();
  a.end = j.at("char_span").at(1).get<std::size_t>();
  a.surface_text = j.value("surface_text", "");
  a.label_id = j.at("label_id").get<std::string>();
  a.origin = j.value("origin", "auto") == "manual" ? AnnotationOrigin::manual : AnnotationOrigin::auto_;
  a.author = j.value("author", "");
  if (auto ts = parse_rfc3339(j.value("created_at", ""))) a.created_at = *ts;
}

}  // namespace quarry
