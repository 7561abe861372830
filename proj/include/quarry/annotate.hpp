#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "quarry/document.hpp"
#include "quarry/time.hpp"

namespace quarry {

enum class MatcherKind { dictionary, regex };

struct MatcherDef {
  MatcherKind kind = MatcherKind::dictionary;
  std::vector<std::string> terms;  // dictionary
  std::string pattern;             // regex

  friend bool operator==(const MatcherDef&, const MatcherDef&) = default;
};

struct LabelDef {
  std::string label_id;
  std::string display_name;
  std::string color = "#888888";
  bool visible = true;
  std::vector<MatcherDef> matchers;

  friend bool operator==(const LabelDef&, const LabelDef&) = default;
};

enum class AnnotationOrigin { auto_, manual };

/// start/end are code-point offsets into page_text() of that page.
struct Annotation {
  std::string annotation_id;
  std::string doc_id;
  int page_index = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface_text;
  std::string label_id;
  AnnotationOrigin origin = AnnotationOrigin::auto_;
  std::string author;
  Timestamp created_at{};

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct TextMatch {
  std::size_t start;
  std::size_t end;
  std::size_t label_index;

  friend bool operator==(const TextMatch&, const TextMatch&) = default;
};

/// Throws InvalidArgument for duplicate ids, bad colours or empty dictionaries.
void validate_labels(const std::vector<LabelDef>& labels);

class CompiledLabelSet {
 public:
  CompiledLabelSet();
  ~CompiledLabelSet();
  CompiledLabelSet(CompiledLabelSet&&) noexcept;
  CompiledLabelSet& operator=(CompiledLabelSet&&) noexcept;

  const std::vector<LabelDef>& labels() const { return labels_; }

  /// Non-overlapping matches sorted by start: longest wins, then earliest,
  /// then the label listed first.
  std::vector<TextMatch> find(std::u32string_view text) const;

 private:
  friend CompiledLabelSet compile_labelset(const std::vector<LabelDef>& labels);
  struct Impl;
  std::vector<LabelDef> labels_;
  std::unique_ptr<Impl> impl_;
};

/// Dictionaries match case-insensitively on word boundaries; whitespace in an
/// entry matches any whitespace run. Regexes are ECMAScript, case-insensitive.
CompiledLabelSet compile_labelset(const std::vector<LabelDef>& labels);

/// Auto annotations for every page; ids are derived from the span so reruns agree.
std::vector<Annotation> auto_annotate(const DocumentRecord& doc, const CompiledLabelSet& matchers, Timestamp now);

/// Drops previous auto annotations, keeps manual ones, adds the fresh set.
std::vector<Annotation> replace_auto(const std::vector<Annotation>& existing, const std::vector<Annotation>& fresh);

Annotation add_manual_annotation(const DocumentRecord& doc, int page_index, std::size_t start, std::size_t end,
                                 const std::string& label_id, const std::vector<LabelDef>& labels,
                                 const std::string& user, Timestamp now, const std::string& annotation_id);

/// Sorted by (page, start); hidden labels dropped unless include_hidden.
std::vector<Annotation> list_annotations(std::vector<Annotation> annotations, const std::vector<LabelDef>& labels,
                                         bool include_hidden);

/// Empty when surface_text matches the page text at the span.
std::string annotation_mismatch(const DocumentRecord& doc, const Annotation& a);

/// Columns: doc_id, page, start, end, text, label, origin, author.
std::string annotations_csv(const std::vector<Annotation>& annotations);

std::string to_string(AnnotationOrigin o);

void to_json(nlohmann::json& j, const MatcherDef& m);
void from_json(const nlohmann::json& j, MatcherDef& m);
void to_json(nlohmann::json& j, const LabelDef& l);
void from_json(const nlohmann::json& j, LabelDef& l);
void to_json(nlohmann::json& j, const Annotation& a);
void from_json(const nlohmann::json& j, Annotation& a);

}  // namespace quarry
