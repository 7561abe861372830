#include "objects.hpp"

#include <charconv>
#include <cstdlib>
#include <stdexcept>

#include <zlib.h>

namespace quarry::pdf::detail {

bool is_whitespace(char c) {
  return c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '\f' || c == '\0';
}

bool is_delimiter(char c) {
  switch (c) {
    case '(': case ')': case '<': case '>': case '[': case ']':
    case '{': case '}': case '/': case '%':
      return true;
    default:
      return false;
  }
}

void Parser::skip_whitespace() {
  while (pos_ < data_.size()) {
    char c = data_[pos_];
    if (is_whitespace(c)) {
      ++pos_;
    } else if (c == '%') {
      while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
    } else {
      break;
    }
  }
}

bool Parser::at_end() {
  skip_whitespace();
  return pos_ >= data_.size();
}

bool Parser::consume_keyword(std::string_view kw) {
  skip_whitespace();
  if (data_.substr(pos_, kw.size()) != kw) return false;
  std::size_t end = pos_ + kw.size();
  if (end < data_.size() && !is_whitespace(data_[end]) && !is_delimiter(data_[end])) return false;
  pos_ = end;
  return true;
}

std::optional<Object> Parser::read(bool allow_refs) {
  skip_whitespace();
  if (pos_ >= data_.size()) return std::nullopt;
  char c = data_[pos_];
  switch (c) {
    case '/':
      return read_name();
    case '(':
      return read_string();
    case '<': {
      if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '<') {
        pos_ += 2;
        auto dict = std::make_shared<Dict>();
        while (true) {
          skip_whitespace();
          if (pos_ >= data_.size()) break;
          if (data_[pos_] == '>' && pos_ + 1 < data_.size() && data_[pos_ + 1] == '>') {
            pos_ += 2;
            break;
          }
          auto key = read(false);
          if (!key) break;
          if (!key->name()) continue;
          auto value = read(true);
          if (!value) break;
          if (value->op()) continue;
          (*dict)[key->name()->value] = std::move(*value);
        }
        return Object{dict};
      }
      return read_hex_string();
    }
    case '[': {
      ++pos_;
      auto arr = std::make_shared<Array>();
      while (true) {
        skip_whitespace();
        if (pos_ >= data_.size()) break;
        if (data_[pos_] == ']') {
          ++pos_;
          break;
        }
        auto item = read(true);
        if (!item) break;
        arr->push_back(std::move(*item));
      }
      return Object{arr};
    }
    case ']': case '>': case ')': case '{': case '}':
      ++pos_;
      return Object{Operator{std::string(1, c)}};
    default:
      break;
  }
  if ((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.') {
    Object num = read_number_or_keyword();
    if (allow_refs && num.number()) {
      double v = *num.number();
      std::size_t save = pos_;
      skip_whitespace();
      std::size_t gen_start = pos_;
      while (pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '9') ++pos_;
      if (pos_ > gen_start && v >= 0 && v == static_cast<int>(v)) {
        int gen = std::atoi(std::string(data_.substr(gen_start, pos_ - gen_start)).c_str());
        skip_whitespace();
        if (pos_ < data_.size() && data_[pos_] == 'R' &&
            (pos_ + 1 >= data_.size() || is_whitespace(data_[pos_ + 1]) || is_delimiter(data_[pos_ + 1]))) {
          ++pos_;
          return Object{Ref{static_cast<int>(v), gen}};
        }
      }
      pos_ = save;
    }
    return num;
  }
  return read_number_or_keyword();
}

Object Parser::read_name() {
  ++pos_;  // '/'
  std::string out;
  while (pos_ < data_.size() && !is_whitespace(data_[pos_]) && !is_delimiter(data_[pos_])) {
    char c = data_[pos_];
    if (c == '#' && pos_ + 2 < data_.size()) {
      int v = 0;
      auto r = std::from_chars(data_.data() + pos_ + 1, data_.data() + pos_ + 3, v, 16);
      if (r.ec == std::errc() && r.ptr == data_.data() + pos_ + 3) {
        out.push_back(static_cast<char>(v));
        pos_ += 3;
        continue;
      }
    }
    out.push_back(c);
    ++pos_;
  }
  return Object{Name{out}};
}

Object Parser::read_string() {
  ++pos_;  // '('
  std::string out;
  int depth = 1;
  while (pos_ < data_.size()) {
    char c = data_[pos_++];
    if (c == '\\') {
      if (pos_ >= data_.size()) break;
      char e = data_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case '\r':
          if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
          break;
        case '\n':
          break;
        default:
          if (e >= '0' && e <= '7') {
            int v = e - '0';
            for (int k = 0; k < 2 && pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '7'; ++k)
              v = v * 8 + (data_[pos_++] - '0');
            out.push_back(static_cast<char>(v & 0xFF));
          } else {
            out.push_back(e);
          }
      }
    } else if (c == '(') {
      ++depth;
      out.push_back(c);
    } else if (c == ')') {
      if (--depth == 0) break;
      out.push_back(c);
    } else {
      out.push_back(c);
    }
  }
  return Object{String{out}};
}

Object Parser::read_hex_string() {
  ++pos_;  // '<'
  std::string out;
  int hi = -1;
  while (pos_ < data_.size()) {
    char c = data_[pos_++];
    if (c == '>') break;
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else continue;
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<char>(hi * 16 + v));
      hi = -1;
    }
  }
  if (hi >= 0) out.push_back(static_cast<char>(hi * 16));
  return Object{String{out}};
}

Object Parser::read_number_or_keyword() {
  std::size_t start = pos_;
  while (pos_ < data_.size() && !is_whitespace(data_[pos_]) && !is_delimiter(data_[pos_])) ++pos_;
  if (pos_ == start) {
    ++pos_;
    return Object{Operator{std::string(1, data_[start])}};
  }
  std::string_view tok = data_.substr(start, pos_ - start);
  char c = tok[0];
  if ((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.') {
    std::string t(tok);
    if (t[0] == '+') t.erase(0, 1);
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end && *end == '\0' && !t.empty()) return Object{v};
    // Malformed numbers like "--5" or "1.2.3": take the leading part.
    return Object{std::strtod(t.c_str(), nullptr)};
  }
  if (tok == "true") return Object{true};
  if (tok == "false") return Object{false};
  if (tok == "null") return Object{Null{}};
  if (tok == "ID") {
    // Inline image data: skip binary payload up to the EI keyword.
    if (pos_ < data_.size()) ++pos_;
    while (pos_ + 1 < data_.size()) {
      if (data_[pos_] == 'E' && data_[pos_ + 1] == 'I' && pos_ > 0 && is_whitespace(data_[pos_ - 1]) &&
          (pos_ + 2 >= data_.size() || is_whitespace(data_[pos_ + 2]))) {
        pos_ += 2;
        return Object{Operator{"EI"}};
      }
      ++pos_;
    }
    pos_ = data_.size();
    return Object{Operator{"EI"}};
  }
  return Object{Operator{std::string(tok)}};
}

Object Parser::read_indirect_body() {
  auto obj = read(true);
  if (!obj) throw std::runtime_error("truncated object");
  if (std::holds_alternative<DictPtr>(obj->value)) {
    std::size_t save = pos_;
    if (consume_keyword("stream")) {
      read_stream(*obj);
      return *obj;
    }
    pos_ = save;
  }
  return *obj;
}

void Parser::read_stream(Object& dict_obj) {
  auto dict = std::get<DictPtr>(dict_obj.value);
  if (pos_ < data_.size() && data_[pos_] == '\r') ++pos_;
  if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
  std::size_t start = pos_;
  auto stream = std::make_shared<Stream>();
  stream->dict = *dict;

  bool done = false;
  if (auto it = dict->find("Length"); it != dict->end() && it->second.number()) {
    double len = *it->second.number();
    if (len >= 0 && start + static_cast<std::size_t>(len) <= data_.size()) {
      Parser probe(data_, start + static_cast<std::size_t>(len));
      if (probe.consume_keyword("endstream")) {
        stream->raw = std::string(data_.substr(start, static_cast<std::size_t>(len)));
        pos_ = probe.position();
        done = true;
      }
    }
  }
  if (!done) {
    std::size_t end = data_.find("endstream", start);
    if (end == std::string_view::npos) end = data_.size();
    std::size_t raw_end = end;
    if (raw_end > start && data_[raw_end - 1] == '\n') --raw_end;
    if (raw_end > start && data_[raw_end - 1] == '\r') --raw_end;
    stream->raw = std::string(data_.substr(start, raw_end - start));
    pos_ = std::min(data_.size(), end + 9);
  }
  dict_obj.value = stream;
}

namespace {

std::string inflate_bytes(const std::string& in) {
  auto run = [&](int window_bits, bool& ok) {
    z_stream zs{};
    std::string out;
    if (inflateInit2(&zs, window_bits) != Z_OK) {
      ok = false;
      return out;
    }
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    char buf[16384];
    int rc = Z_OK;
    while (rc == Z_OK) {
      zs.next_out = reinterpret_cast<Bytef*>(buf);
      zs.avail_out = sizeof(buf);
      rc = inflate(&zs, Z_NO_FLUSH);
      out.append(buf, sizeof(buf) - zs.avail_out);
      if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;
    }
    ok = rc == Z_STREAM_END || !out.empty();
    inflateEnd(&zs);
    return out;
  };
  bool ok = false;
  std::string out = run(15, ok);
  if (ok) return out;
  out = run(-15, ok);
  if (ok) return out;
  throw std::runtime_error("flate decode failed");
}

int dict_int(const Dict* d, const char* key, int fallback) {
  if (!d) return fallback;
  auto it = d->find(key);
  if (it == d->end() || !it->second.number()) return fallback;
  return static_cast<int>(*it->second.number());
}

std::string apply_predictor(const std::string& in, const Dict* parms) {
  int predictor = dict_int(parms, "Predictor", 1);
  if (predictor < 2) return in;
  int colors = dict_int(parms, "Colors", 1);
  int bpc = dict_int(parms, "BitsPerComponent", 8);
  int columns = dict_int(parms, "Columns", 1);
  std::size_t bpp = std::max(1, colors * bpc / 8);
  std::size_t rowlen = (static_cast<std::size_t>(columns) * colors * bpc + 7) / 8;
  std::string out;
  if (predictor == 2) {
    if (bpc != 8) return in;
    out = in;
    for (std::size_t row = 0; row + rowlen <= out.size(); row += rowlen)
      for (std::size_t i = bpp; i < rowlen; ++i)
        out[row + i] = static_cast<char>(out[row + i] + out[row + i - bpp]);
    return out;
  }
  std::string prev(rowlen, '\0');
  std::size_t pos = 0;
  while (pos + 1 + rowlen <= in.size()) {
    int type = static_cast<unsigned char>(in[pos]);
    std::string row = in.substr(pos + 1, rowlen);
    for (std::size_t i = 0; i < rowlen; ++i) {
      int a = i >= bpp ? static_cast<unsigned char>(row[i - bpp]) : 0;
      int b = static_cast<unsigned char>(prev[i]);
      int c = i >= bpp ? static_cast<unsigned char>(prev[i - bpp]) : 0;
      int x = static_cast<unsigned char>(row[i]);
      switch (type) {
        case 1: x += a; break;
        case 2: x += b; break;
        case 3: x += (a + b) / 2; break;
        case 4: {
          int p = a + b - c;
          int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
          x += (pa <= pb && pa <= pc) ? a : (pb <= pc ? b : c);
          break;
        }
        default: break;
      }
      row[i] = static_cast<char>(x & 0xFF);
    }
    out += row;
    prev = row;
    pos += 1 + rowlen;
  }
  return out;
}

std::string ascii_hex(const std::string& in) {
  std::string out;
  int hi = -1;
  for (char c : in) {
    if (c == '>') break;
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else continue;
    if (hi < 0) hi = v;
    else {
      out.push_back(static_cast<char>(hi * 16 + v));
      hi = -1;
    }
  }
  if (hi >= 0) out.push_back(static_cast<char>(hi * 16));
  return out;
}

std::string ascii85(const std::string& in) {
  std::string out;
  std::uint32_t tuple = 0;
  int count = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    char c = in[i];
    if (c == '~') break;
    if (is_whitespace(c)) continue;
    if (c == 'z' && count == 0) {
      out.append(4, '\0');
      continue;
    }
    if (c < '!' || c > 'u') continue;
    tuple = tuple * 85 + static_cast<std::uint32_t>(c - '!');
    if (++count == 5) {
      for (int k = 3; k >= 0; --k) out.push_back(static_cast<char>((tuple >> (8 * k)) & 0xFF));
      tuple = 0;
      count = 0;
    }
  }
  if (count > 1) {
    for (int k = count; k < 5; ++k) tuple = tuple * 85 + 84;
    for (int k = 0; k < count - 1; ++k) out.push_back(static_cast<char>((tuple >> (8 * (3 - k))) & 0xFF));
  }
  return out;
}

std::string run_length(const std::string& in) {
  std::string out;
  std::size_t i = 0;
  while (i < in.size()) {
    int len = static_cast<unsigned char>(in[i++]);
    if (len == 128) break;
    if (len < 128) {
      out.append(in.substr(i, len + 1));
      i += len + 1;
    } else if (i < in.size()) {
      out.append(257 - len, in[i++]);
    }
  }
  return out;
}

}  // namespace

std::string decode_filters(const Stream& s) {
  std::vector<std::string> filters;
  std::vector<const Dict*> parms;
  if (auto it = s.dict.find("Filter"); it != s.dict.end()) {
    if (auto n = it->second.name()) filters.push_back(n->value);
    else if (auto a = it->second.array())
      for (auto& f : *a)
        if (auto n = f.name()) filters.push_back(n->value);
  }
  if (auto it = s.dict.find("DecodeParms"); it != s.dict.end()) {
    if (auto a = it->second.array())
      for (auto& p : *a) parms.push_back(p.dict());
    else
      parms.push_back(it->second.dict());
  }
  std::string data = s.raw;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    const Dict* p = i < parms.size() ? parms[i] : nullptr;
    const auto& f = filters[i];
    if (f == "FlateDecode" || f == "Fl") data = apply_predictor(inflate_bytes(data), p);
    else if (f == "ASCIIHexDecode" || f == "AHx") data = ascii_hex(data);
    else if (f == "ASCII85Decode" || f == "A85") data = ascii85(data);
    else if (f == "RunLengthDecode" || f == "RL") data = run_length(data);
    else throw std::runtime_error("unsupported filter " + f);
  }
  return data;
}

}  // namespace quarry::pdf::detail
