#include "fonts.hpp"

#include <cstdlib>
#include <unordered_map>

#include "quarry/pdf.hpp"
#include "quarry/text.hpp"

namespace quarry::pdf {

namespace {
// Helvetica advance widths for codes 32..126.
constexpr int kHelvetica[95] = {
    278, 278, 355, 556, 556, 889, 667, 191, 333, 333, 389, 584, 278, 333, 278, 278,  // 32-47
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 278, 278, 584, 584, 584, 556,  // 48-63
    1015, 667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833, 722, 778,  // 64-79
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 278, 278, 278, 469, 556,   // 80-95
    333, 556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833, 556, 556,   // 96-111
    556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500, 334, 260, 334, 584,        // 112-126
};
}  // namespace

int helvetica_width(unsigned char code) {
  if (code >= 32 && code <= 126) return kHelvetica[code - 32];
  if (code == 0xB0) return 400;  // degree
  if (code == 0xBA) return 365;  // ordmasculine
  if (code == 0x96) return 556;  // endash
  if (code == 0x97) return 1000;  // emdash
  return 556;
}

}  // namespace quarry::pdf

namespace quarry::pdf::detail {

const Object& ObjectStore::resolve(const Object& obj) const {
  static const Object null_object{Null{}};
  const Object* cur = &obj;
  for (int depth = 0; depth < 32; ++depth) {
    auto r = cur->ref();
    if (!r) return *cur;
    auto it = objects_.find(r->num);
    if (it == objects_.end()) return null_object;
    cur = &it->second;
  }
  return null_object;
}

const Object* ObjectStore::get(const Dict& d, const std::string& key) const {
  auto it = d.find(key);
  if (it == d.end()) return nullptr;
  const Object& o = resolve(it->second);
  return o.is_null() ? nullptr : &o;
}

const Dict* ObjectStore::get_dict(const Dict& d, const std::string& key) const {
  auto o = get(d, key);
  return o ? o->dict() : nullptr;
}

const Array* ObjectStore::get_array(const Dict& d, const std::string& key) const {
  auto o = get(d, key);
  return o ? o->array() : nullptr;
}

double ObjectStore::get_number(const Dict& d, const std::string& key, double fallback) const {
  auto o = get(d, key);
  return o && o->number() ? *o->number() : fallback;
}

std::string ObjectStore::get_name(const Dict& d, const std::string& key) const {
  auto o = get(d, key);
  return o && o->name() ? o->name()->value : std::string{};
}

char32_t winansi_to_unicode(unsigned char code) {
  static constexpr char32_t high[32] = {
      0x20AC, 0,      0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
      0x2039, 0x0152, 0,      0x017D, 0,      0,      0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
      0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0,      0x017E, 0x0178};
  if (code >= 0x80 && code < 0xA0) return high[code - 0x80];
  return code;
}

namespace {

char32_t glyph_name_to_unicode(const std::string& name) {
  static const std::unordered_map<std::string, char32_t> names = {
      {"space", U' '},        {"exclam", U'!'},       {"quotedbl", U'"'},     {"numbersign", U'#'},
      {"dollar", U'$'},       {"percent", U'%'},      {"ampersand", U'&'},    {"quotesingle", U'\''},
      {"parenleft", U'('},    {"parenright", U')'},   {"asterisk", U'*'},     {"plus", U'+'},
      {"comma", U','},        {"hyphen", U'-'},       {"period", U'.'},       {"slash", U'/'},
      {"zero", U'0'},         {"one", U'1'},          {"two", U'2'},          {"three", U'3'},
      {"four", U'4'},         {"five", U'5'},         {"six", U'6'},          {"seven", U'7'},
      {"eight", U'8'},        {"nine", U'9'},         {"colon", U':'},        {"semicolon", U';'},
      {"less", U'<'},         {"equal", U'='},        {"greater", U'>'},      {"question", U'?'},
      {"at", U'@'},           {"bracketleft", U'['},  {"backslash", U'\\'},   {"bracketright", U']'},
      {"asciicircum", U'^'},  {"underscore", U'_'},   {"grave", U'`'},        {"braceleft", U'{'},
      {"bar", U'|'},          {"braceright", U'}'},   {"asciitilde", U'~'},   {"degree", 0xB0},
      {"quoteright", 0x2019}, {"quoteleft", 0x2018},  {"quotedblleft", 0x201C}, {"quotedblright", 0x201D},
      {"endash", 0x2013},     {"emdash", 0x2014},     {"bullet", 0x2022},     {"minus", 0x2212},
      {"multiply", 0xD7},     {"plusminus", 0xB1},    {"mu", 0xB5},           {"ordmasculine", 0xBA},
      {"fi", 0xFB01},         {"fl", 0xFB02},         {"ff", 0xFB00},         {"ffi", 0xFB03},
      {"ffl", 0xFB04},        {"periodcentered", 0xB7}, {"section", 0xA7},    {"paragraph", 0xB6},
      {"copyright", 0xA9},    {"registered", 0xAE},   {"dagger", 0x2020},     {"daggerdbl", 0x2021},
      {"ellipsis", 0x2026},   {"prime", 0x2032},      {"minute", 0x2032},     {"second", 0x2033},
  };
  if (name.size() == 1 && ((name[0] >= 'A' && name[0] <= 'Z') || (name[0] >= 'a' && name[0] <= 'z')))
    return static_cast<char32_t>(name[0]);
  if (auto it = names.find(name); it != names.end()) return it->second;
  if (name.size() == 7 && name.rfind("uni", 0) == 0)
    return static_cast<char32_t>(std::strtoul(name.substr(3).c_str(), nullptr, 16));
  return 0;
}

std::u32string utf16be_to_u32(const std::string& bytes) {
  std::u32string out;
  for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
    char32_t u = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
    if (u >= 0xD800 && u < 0xDC00 && i + 3 < bytes.size()) {
      char32_t lo = (static_cast<unsigned char>(bytes[i + 2]) << 8) | static_cast<unsigned char>(bytes[i + 3]);
      u = 0x10000 + ((u - 0xD800) << 10) + (lo - 0xDC00);
      i += 2;
    }
    out.push_back(u);
  }
  if (bytes.size() == 1) out.push_back(static_cast<unsigned char>(bytes[0]));
  return out;
}

unsigned bytes_to_code(const std::string& b) {
  unsigned v = 0;
  for (char c : b) v = (v << 8) | static_cast<unsigned char>(c);
  return v;
}

void parse_to_unicode(const std::string& cmap, std::map<unsigned, std::u32string>& out) {
  Parser p(cmap);
  std::vector<Object> operands;
  while (auto obj = p.read(false)) {
    auto op = obj->op();
    if (!op) {
      operands.push_back(std::move(*obj));
      continue;
    }
    if (op->value == "endbfchar") {
      for (std::size_t i = 0; i + 1 < operands.size(); i += 2) {
        auto src = operands[i].string();
        auto dst = operands[i + 1].string();
        if (src && dst) out[bytes_to_code(src->bytes)] = utf16be_to_u32(dst->bytes);
        else if (src && operands[i + 1].name())
          out[bytes_to_code(src->bytes)] = std::u32string(1, glyph_name_to_unicode(operands[i + 1].name()->value));
      }
    } else if (op->value == "endbfrange") {
      for (std::size_t i = 0; i + 2 < operands.size(); i += 3) {
        auto lo = operands[i].string();
        auto hi = operands[i + 1].string();
        if (!lo || !hi) continue;
        unsigned a = bytes_to_code(lo->bytes), b = bytes_to_code(hi->bytes);
        if (b < a || b - a > 0xFFFF) continue;
        if (auto dst = operands[i + 2].string()) {
          std::u32string base = utf16be_to_u32(dst->bytes);
          for (unsigned c = a; c <= b; ++c) {
            std::u32string v = base;
            if (!v.empty()) v.back() += (c - a);
            out[c] = v;
          }
        } else if (auto arr = operands[i + 2].array()) {
          for (unsigned c = a; c <= b && c - a < arr->size(); ++c)
            if (auto s = (*arr)[c - a].string()) out[c] = utf16be_to_u32(s->bytes);
        }
      }
    }
    operands.clear();
  }
}

void read_descriptor(const ObjectStore& store, const Dict* desc, double& ascent, double& descent) {
  if (!desc) return;
  double a = store.get_number(*desc, "Ascent", 0);
  double d = store.get_number(*desc, "Descent", 0);
  if (a > 0 && a < 1500) ascent = a / 1000.0;
  if (d < 0 && d > -1000) descent = d / 1000.0;
}

}  // namespace

Font::Font() {
  for (unsigned i = 0; i < 256; ++i) encoding_[i] = winansi_to_unicode(static_cast<unsigned char>(i));
}

Font Font::load(const ObjectStore& store, const Dict& font) {
  Font f;
  std::string subtype = store.get_name(font, "Subtype");
  std::string base_font = store.get_name(font, "BaseFont");

  if (subtype == "Type0") {
    f.two_byte_ = true;
    f.default_width_ = 1000;
    if (auto desc = store.get_array(font, "DescendantFonts"); desc && !desc->empty()) {
      if (auto cid = store.dict((*desc)[0])) {
        f.default_width_ = store.get_number(*cid, "DW", 1000);
        if (auto w = store.get_array(*cid, "W")) {
          std::size_t i = 0;
          while (i < w->size()) {
            auto first = store.resolve((*w)[i]).number();
            if (!first || i + 1 >= w->size()) break;
            const Object& next = store.resolve((*w)[i + 1]);
            if (auto list = next.array()) {
              unsigned c = static_cast<unsigned>(*first);
              for (auto& item : *list)
                if (auto n = store.resolve(item).number()) f.widths_[c++] = *n;
              i += 2;
            } else if (i + 2 < w->size()) {
              auto last = next.number();
              auto width = store.resolve((*w)[i + 2]).number();
              if (last && width)
                for (unsigned c = static_cast<unsigned>(*first); c <= static_cast<unsigned>(*last) && c - *first < 65536; ++c)
                  f.widths_[c] = *width;
              i += 3;
            } else {
              break;
            }
          }
        }
        read_descriptor(store, store.get_dict(*cid, "FontDescriptor"), f.ascent_, f.descent_);
      }
    }
  } else {
    if (auto enc = store.get(font, "Encoding")) {
      if (auto d = enc->dict()) {
        if (auto diffs = store.get_array(*d, "Differences")) {
          unsigned code = 0;
          for (auto& item : *diffs) {
            const Object& o = store.resolve(item);
            if (auto n = o.number()) code = static_cast<unsigned>(*n);
            else if (auto name = o.name()) {
              if (code < 256) {
                if (char32_t u = glyph_name_to_unicode(name->value)) f.encoding_[code] = u;
              }
              ++code;
            }
          }
        }
      }
    }
    int first_char = static_cast<int>(store.get_number(font, "FirstChar", 0));
    if (auto widths = store.get_array(font, "Widths")) {
      for (std::size_t i = 0; i < widths->size(); ++i)
        if (auto n = store.resolve((*widths)[i]).number()) f.widths_[first_char + static_cast<unsigned>(i)] = *n;
    } else if (base_font.find("Courier") != std::string::npos) {
      f.default_width_ = 600;
    } else {
      for (unsigned c = 0; c < 256; ++c) f.widths_[c] = helvetica_width(static_cast<unsigned char>(c));
    }
    if (auto desc = store.get_dict(font, "FontDescriptor")) {
      f.default_width_ = store.get_number(*desc, "MissingWidth", f.default_width_);
      read_descriptor(store, desc, f.ascent_, f.descent_);
    }
    if (subtype == "Type3") {
      if (auto m = store.get_array(font, "FontMatrix"); m && !m->empty())
        if (auto a = store.resolve((*m)[0]).number()) f.width_scale_ = *a;
    }
  }

  if (auto tu = store.get(font, "ToUnicode"); tu && tu->stream()) {
    try {
      parse_to_unicode(decode_filters(*tu->stream()), f.to_unicode_);
    } catch (const std::exception&) {
      // fall back to the encoding
    }
  }
  return f;
}

std::vector<unsigned> Font::codes(const std::string& bytes) const {
  std::vector<unsigned> out;
  if (two_byte_) {
    for (std::size_t i = 0; i + 1 < bytes.size(); i += 2)
      out.push_back((static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]));
  } else {
    for (char c : bytes) out.push_back(static_cast<unsigned char>(c));
  }
  return out;
}

double Font::advance(unsigned code) const {
  auto it = widths_.find(code);
  return (it != widths_.end() ? it->second : default_width_) * width_scale_;
}

std::string Font::to_utf8(unsigned code) const {
  std::string out;
  if (auto it = to_unicode_.find(code); it != to_unicode_.end()) {
    for (char32_t c : it->second)
      if (c) text::append_utf8(out, c);
    return out;
  }
  if (two_byte_) return out;
  char32_t u = code < 256 ? encoding_[code] : 0;
  if (u >= 0x20 || u == U'\t') text::append_utf8(out, u);
  return out;
}

}  // namespace quarry::pdf::detail
