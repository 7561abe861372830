#pragma once

// Internal PDF object model and tokenizer.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace quarry::pdf::detail {

struct Object;
struct Null {};
struct Name {
  std::string value;
};
struct String {
  std::string bytes;
};
struct Ref {
  int num = 0;
  int gen = 0;
};
/// Bare content-stream keyword such as "Tj" or "re".
struct Operator {
  std::string value;
};
using Array = std::vector<Object>;
using Dict = std::map<std::string, Object>;
struct Stream;

using ArrayPtr = std::shared_ptr<Array>;
using DictPtr = std::shared_ptr<Dict>;
using StreamPtr = std::shared_ptr<Stream>;

struct Object {
  std::variant<Null, bool, double, Name, String, ArrayPtr, DictPtr, Ref, StreamPtr, Operator> value;

  bool is_null() const { return std::holds_alternative<Null>(value); }
  const double* number() const { return std::get_if<double>(&value); }
  const Name* name() const { return std::get_if<Name>(&value); }
  const String* string() const { return std::get_if<String>(&value); }
  const Array* array() const {
    auto p = std::get_if<ArrayPtr>(&value);
    return p ? p->get() : nullptr;
  }
  const Dict* dict() const;
  const Ref* ref() const { return std::get_if<Ref>(&value); }
  const Stream* stream() const {
    auto p = std::get_if<StreamPtr>(&value);
    return p ? p->get() : nullptr;
  }
  const Operator* op() const { return std::get_if<Operator>(&value); }
};

struct Stream {
  Dict dict;
  std::string raw;
};

inline const Dict* Object::dict() const {
  if (auto p = std::get_if<DictPtr>(&value)) return p->get();
  if (auto s = stream()) return &s->dict;
  return nullptr;
}

bool is_whitespace(char c);
bool is_delimiter(char c);

/// Tokenizer/parser over a byte range. Streams are recognized only when
/// `allow_streams` is set (top-level file parsing, not content streams).
class Parser {
 public:
  explicit Parser(std::string_view data, std::size_t pos = 0) : data_(data), pos_(pos) {}

  void skip_whitespace();
  bool at_end();
  std::size_t position() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }

  /// Reads one object; in content streams, bare keywords come back as Operator.
  /// Returns nullopt at end of input.
  std::optional<Object> read(bool allow_refs = true);

  /// Reads an indirect object body after "N G obj", including a trailing stream.
  Object read_indirect_body();

  bool consume_keyword(std::string_view kw);

 private:
  Object read_string();
  Object read_hex_string();
  Object read_name();
  Object read_number_or_keyword();
  void read_stream(Object& dict_obj);

  std::string_view data_;
  std::size_t pos_;
};

std::string decode_filters(const Stream& s);

}  // namespace quarry::pdf::detail
