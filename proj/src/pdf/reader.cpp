#include <algorithm>
#include <cmath>
#include <set>

#include "fonts.hpp"
#include "quarry/error.hpp"
#include "quarry/pdf.hpp"
#include "quarry/text.hpp"

namespace quarry::pdf {

using namespace detail;

namespace {

struct Matrix {
  double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

  // Row-vector convention: p' = p * M, so (this * o) applies this first.
  Matrix operator*(const Matrix& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c,
            c * o.b + d * o.d, e * o.a + f * o.c + o.e, e * o.b + f * o.d + o.f};
  }
  void apply(double x, double y, double& ox, double& oy) const {
    ox = a * x + c * y + e;
    oy = b * x + d * y + f;
  }
  static Matrix translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }
};

Matrix matrix_from(const ObjectStore& store, const Array* arr) {
  Matrix m;
  if (!arr || arr->size() < 6) return m;
  double v[6];
  for (int i = 0; i < 6; ++i) {
    auto n = store.resolve((*arr)[i]).number();
    v[i] = n ? *n : 0;
  }
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

struct Point {
  double x, y;
};

struct GraphicsState {
  Matrix ctm;
  const Font* font = nullptr;
  double font_size = 0;
  double char_spacing = 0;
  double word_spacing = 0;
  double horizontal_scale = 1;
  double leading = 0;
  double rise = 0;
};

/// Executes content-stream operators, collecting text runs and rulings in
/// unshifted user space.
class ContentInterpreter {
 public:
  ContentInterpreter(const ObjectStore& store, const ParseOptions& options, Page& page)
      : store_(store), options_(options), page_(page) {}

  void run(const std::string& content, const Dict* resources, int depth);

 private:
  void op(const std::string& name, std::vector<Object>& args, const Dict* resources, int depth);
  double num(const std::vector<Object>& args, std::size_t i) const {
    if (i >= args.size()) return 0;
    auto n = args[i].number();
    return n ? *n : 0;
  }
  void show(const std::vector<Object>& items);
  void emit_run(const std::string& text, const Matrix& start, double advance);
  void next_line(double tx, double ty) {
    line_matrix_ = Matrix::translate(tx, ty) * line_matrix_;
    text_matrix_ = line_matrix_;
  }
  void stroke();
  void fill();
  void add_ruling(Point p, Point q);
  const Font* font_for(const Dict* resources, const std::string& name);

  const ObjectStore& store_;
  const ParseOptions& options_;
  Page& page_;
  GraphicsState gs_;
  std::vector<GraphicsState> stack_;
  Matrix text_matrix_, line_matrix_;

  std::vector<std::pair<Point, Point>> edges_;
  std::vector<BBox> rects_;
  Point current_{0, 0}, subpath_start_{0, 0};

  std::map<const Dict*, Font> fonts_;
  Font default_font_;

  // Tracks the previous run so adjacent show operators on one line join.
  bool have_last_ = false;
  double last_baseline_ = 0, last_end_x_ = 0, last_size_ = 0;
};

const Font* ContentInterpreter::font_for(const Dict* resources, const std::string& name) {
  if (!resources) return &default_font_;
  auto fonts = store_.get_dict(*resources, "Font");
  if (!fonts) return &default_font_;
  auto fd = store_.get_dict(*fonts, name);
  if (!fd) return &default_font_;
  auto it = fonts_.find(fd);
  if (it == fonts_.end()) it = fonts_.emplace(fd, Font::load(store_, *fd)).first;
  return &it->second;
}

void ContentInterpreter::run(const std::string& content, const Dict* resources, int depth) {
  Parser parser(content);
  std::vector<Object> args;
  while (auto obj = parser.read(false)) {
    if (auto o = obj->op()) {
      op(o->value, args, resources, depth);
      args.clear();
    } else {
      args.push_back(std::move(*obj));
      if (args.size() > 64) args.erase(args.begin());
    }
  }
}

void ContentInterpreter::op(const std::string& name, std::vector<Object>& args, const Dict* resources,
                            int depth) {
  const Matrix& ctm = gs_.ctm;
  if (name == "q") {
    stack_.push_back(gs_);
  } else if (name == "Q") {
    if (!stack_.empty()) {
      gs_ = stack_.back();
      stack_.pop_back();
    }
  } else if (name == "cm") {
    Matrix m{num(args, 0), num(args, 1), num(args, 2), num(args, 3), num(args, 4), num(args, 5)};
    gs_.ctm = m * gs_.ctm;
  } else if (name == "BT") {
    text_matrix_ = line_matrix_ = Matrix{};
  } else if (name == "Tf") {
    if (!args.empty() && args[0].name()) gs_.font = font_for(resources, args[0].name()->value);
    gs_.font_size = num(args, 1);
  } else if (name == "Tc") {
    gs_.char_spacing = num(args, 0);
  } else if (name == "Tw") {
    gs_.word_spacing = num(args, 0);
  } else if (name == "Tz") {
    gs_.horizontal_scale = num(args, 0) / 100.0;
  } else if (name == "TL") {
    gs_.leading = num(args, 0);
  } else if (name == "Ts") {
    gs_.rise = num(args, 0);
  } else if (name == "Td") {
    next_line(num(args, 0), num(args, 1));
  } else if (name == "TD") {
    gs_.leading = -num(args, 1);
    next_line(num(args, 0), num(args, 1));
  } else if (name == "Tm") {
    text_matrix_ = line_matrix_ =
        Matrix{num(args, 0), num(args, 1), num(args, 2), num(args, 3), num(args, 4), num(args, 5)};
  } else if (name == "T*") {
    next_line(0, -gs_.leading);
  } else if (name == "Tj") {
    show(args);
  } else if (name == "TJ") {
    if (!args.empty() && args[0].array()) show(*args[0].array());
  } else if (name == "'") {
    next_line(0, -gs_.leading);
    show(args);
  } else if (name == "\"") {
    gs_.word_spacing = num(args, 0);
    gs_.char_spacing = num(args, 1);
    next_line(0, -gs_.leading);
    if (args.size() > 2) show({args[2]});
  } else if (name == "m") {
    ctm.apply(num(args, 0), num(args, 1), current_.x, current_.y);
    subpath_start_ = current_;
  } else if (name == "l") {
    Point p;
    ctm.apply(num(args, 0), num(args, 1), p.x, p.y);
    edges_.push_back({current_, p});
    current_ = p;
  } else if (name == "c") {
    ctm.apply(num(args, 4), num(args, 5), current_.x, current_.y);
  } else if (name == "v" || name == "y") {
    ctm.apply(num(args, 2), num(args, 3), current_.x, current_.y);
  } else if (name == "h") {
    edges_.push_back({current_, subpath_start_});
    current_ = subpath_start_;
  } else if (name == "re") {
    double x = num(args, 0), y = num(args, 1), w = num(args, 2), h = num(args, 3);
    Point p[4];
    ctm.apply(x, y, p[0].x, p[0].y);
    ctm.apply(x + w, y, p[1].x, p[1].y);
    ctm.apply(x + w, y + h, p[2].x, p[2].y);
    ctm.apply(x, y + h, p[3].x, p[3].y);
    for (int i = 0; i < 4; ++i) edges_.push_back({p[i], p[(i + 1) % 4]});
    BBox r{p[0].x, p[0].y, p[0].x, p[0].y};
    for (auto& q : p) r = r.united({q.x, q.y, q.x, q.y});
    rects_.push_back(r);
    current_ = subpath_start_ = p[0];
  } else if (name == "S") {
    stroke();
  } else if (name == "s") {
    edges_.push_back({current_, subpath_start_});
    stroke();
  } else if (name == "f" || name == "F" || name == "f*") {
    fill();
  } else if (name == "B" || name == "B*" || name == "b" || name == "b*") {
    if (name[0] == 'b') edges_.push_back({current_, subpath_start_});
    stroke();
  } else if (name == "n") {
    edges_.clear();
    rects_.clear();
  } else if (name == "Do") {
    if (depth >= 8 || args.empty() || !args[0].name() || !resources) return;
    auto xobjects = store_.get_dict(*resources, "XObject");
    if (!xobjects) return;
    auto xo = store_.get(*xobjects, args[0].name()->value);
    if (!xo || !xo->stream()) return;
    const Stream& form = *xo->stream();
    if (store_.get_name(form.dict, "Subtype") != "Form") return;
    std::string body;
    try {
      body = decode_filters(form);
    } catch (const std::exception&) {
      return;
    }
    auto saved = gs_;
    auto saved_stack = stack_.size();
    gs_.ctm = matrix_from(store_, store_.get_array(form.dict, "Matrix")) * gs_.ctm;
    const Dict* form_resources = store_.get_dict(form.dict, "Resources");
    run(body, form_resources ? form_resources : resources, depth + 1);
    stack_.resize(std::min(stack_.size(), saved_stack));
    gs_ = saved;
  }
}

void ContentInterpreter::show(const std::vector<Object>& items) {
  const Font& font = gs_.font ? *gs_.font : default_font_;
  const double size = gs_.font_size;
  const double th = gs_.horizontal_scale;
  Matrix start = text_matrix_;
  std::string text;
  double advance = 0;
  auto flush = [&]() {
    emit_run(text, start, advance);
    text.clear();
    advance = 0;
  };
  for (const auto& item : items) {
    if (auto n = item.number()) {
      double tx = -*n / 1000.0 * size * th;
      if (*n < -250 && !text.empty() && text.back() != ' ') {
        if (*n < -3000) {
          // A jump this wide separates distinct runs.
          flush();
          text_matrix_ = Matrix::translate(tx, 0) * text_matrix_;
          start = text_matrix_;
          continue;
        }
        text.push_back(' ');
      }
      advance += tx;
      text_matrix_ = Matrix::translate(tx, 0) * text_matrix_;
      continue;
    }
    auto s = item.string();
    if (!s) continue;
    for (unsigned code : font.codes(s->bytes)) {
      text += font.to_utf8(code);
      double tx = (font.advance(code) * size + gs_.char_spacing + (font.is_space(code) ? gs_.word_spacing : 0)) * th;
      advance += tx;
      text_matrix_ = Matrix::translate(tx, 0) * text_matrix_;
    }
  }
  flush();
}

void ContentInterpreter::emit_run(const std::string& raw, const Matrix& start, double advance) {
  std::string content = text::trim(raw);
  if (content.empty()) return;
  const Font& font = gs_.font ? *gs_.font : default_font_;
  const double size = gs_.font_size;
  Matrix m = start * gs_.ctm;
  double rise = gs_.rise;
  double lo = rise + font.descent() * size;
  double hi = rise + font.ascent() * size;
  double xs[4], ys[4];
  m.apply(0, lo, xs[0], ys[0]);
  m.apply(advance, lo, xs[1], ys[1]);
  m.apply(advance, hi, xs[2], ys[2]);
  m.apply(0, hi, xs[3], ys[3]);
  BBox box{xs[0], ys[0], xs[0], ys[0]};
  for (int i = 1; i < 4; ++i) box = box.united({xs[i], ys[i], xs[i], ys[i]});
  double effective = std::abs(size) * std::hypot(m.c, m.d);
  if (effective <= 0) effective = std::abs(size) > 0 ? std::abs(size) : 1;
  double baseline_x, baseline_y;
  m.apply(0, rise, baseline_x, baseline_y);
  double end_x, end_y;
  m.apply(advance, rise, end_x, end_y);

  if (have_last_ && !page_.runs.empty() && std::abs(baseline_y - last_baseline_) < 0.05 * effective &&
      std::abs(effective - last_size_) < 0.01 * effective) {
    double gap = baseline_x - last_end_x_;
    if (gap > -0.1 * effective && gap < 0.15 * effective) {
      auto& prev = page_.runs.back();
      if (gap >= 0.1 * effective || raw.front() == ' ') prev.text.push_back(' ');
      prev.text += content;
      prev.bbox = prev.bbox.united(box);
      last_end_x_ = end_x;
      return;
    }
  }
  page_.runs.push_back({box, content, effective});
  have_last_ = true;
  last_baseline_ = baseline_y;
  last_end_x_ = end_x;
  last_size_ = effective;
}

void ContentInterpreter::add_ruling(Point p, Point q) {
  const double tol = options_.axis_tolerance_pt;
  double dx = std::abs(q.x - p.x), dy = std::abs(q.y - p.y);
  if (dy <= tol && dx > tol) {
    double y = 0.5 * (p.y + q.y);
    page_.rulings.push_back({std::min(p.x, q.x), y, std::max(p.x, q.x), y});
  } else if (dx <= tol && dy > tol) {
    double x = 0.5 * (p.x + q.x);
    page_.rulings.push_back({x, std::min(p.y, q.y), x, std::max(p.y, q.y)});
  }
}

void ContentInterpreter::stroke() {
  for (auto& [p, q] : edges_) add_ruling(p, q);
  edges_.clear();
  rects_.clear();
}

void ContentInterpreter::fill() {
  const double thin = options_.thin_fill_pt;
  for (const auto& r : rects_) {
    if (r.height() <= thin && r.width() > 2 * thin) {
      add_ruling({r.x0, r.center_y()}, {r.x1, r.center_y()});
    } else if (r.width() <= thin && r.height() > 2 * thin) {
      add_ruling({r.center_x(), r.y0}, {r.center_x(), r.y1});
    }
  }
  edges_.clear();
  rects_.clear();
}

std::string decode_text_string(const std::string& bytes) {
  std::string out;
  if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0xFE &&
      static_cast<unsigned char>(bytes[1]) == 0xFF) {
    for (std::size_t i = 2; i + 1 < bytes.size(); i += 2) {
      char32_t u = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
      if (u >= 0xD800 && u < 0xDC00 && i + 3 < bytes.size()) {
        char32_t lo = (static_cast<unsigned char>(bytes[i + 2]) << 8) | static_cast<unsigned char>(bytes[i + 3]);
        u = 0x10000 + ((u - 0xD800) << 10) + (lo - 0xDC00);
        i += 2;
      }
      if (u) text::append_utf8(out, u);
    }
    return out;
  }
  if (bytes.size() >= 3 && bytes.compare(0, 3, "\xEF\xBB\xBF") == 0) return bytes.substr(3);
  for (char c : bytes) {
    char32_t u = winansi_to_unicode(static_cast<unsigned char>(c));
    if (u) text::append_utf8(out, u);
  }
  return out;
}

bool is_obj_boundary(std::string_view data, std::size_t pos) {
  return pos >= data.size() || is_whitespace(data[pos]) || is_delimiter(data[pos]);
}

/// Locates "N G obj" headers by linear scan; tolerant of broken xref tables.
void scan_objects(std::string_view data, std::size_t from, ObjectStore& store,
                  std::vector<std::pair<std::size_t, Dict>>& trailers) {
  for (std::size_t t = data.find("trailer", from); t != std::string_view::npos; t = data.find("trailer", t + 7)) {
    Parser p(data, t + 7);
    auto d = p.read(true);
    if (d && d->dict()) trailers.push_back({t, *d->dict()});
  }
  std::size_t i = from;
  while (true) {
    std::size_t obj_kw = data.find("obj", i);
    if (obj_kw == std::string_view::npos) break;
    i = obj_kw + 3;
    if (!is_obj_boundary(data, obj_kw + 3) || obj_kw == 0 || !is_whitespace(data[obj_kw - 1])) continue;
    std::size_t k = obj_kw;
    while (k > 0 && is_whitespace(data[k - 1])) --k;
    std::size_t gen_end = k;
    while (k > 0 && data[k - 1] >= '0' && data[k - 1] <= '9') --k;
    if (k == gen_end) continue;
    std::size_t gen_start = k;
    while (k > 0 && is_whitespace(data[k - 1])) --k;
    if (k == gen_start) continue;
    std::size_t num_end = k;
    while (k > 0 && data[k - 1] >= '0' && data[k - 1] <= '9') --k;
    if (k == num_end || num_end - k > 9) continue;
    if (k > 0 && !is_whitespace(data[k - 1]) && !is_delimiter(data[k - 1])) continue;
    int num = std::stoi(std::string(data.substr(k, num_end - k)));
    Parser p(data, obj_kw + 3);
    try {
      Object body = p.read_indirect_body();
      if (auto s = body.stream(); s && store.get_name(s->dict, "Type") == "XRef") trailers.push_back({k, s->dict});
      store.put(num, std::move(body));
      p.consume_keyword("endobj");
      i = std::max(i, p.position());
    } catch (const std::exception&) {
      // unparsable object: keep scanning
    }
  }
  std::stable_sort(trailers.begin(), trailers.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
}

void expand_object_streams(ObjectStore& store) {
  std::vector<std::pair<int, Object>> found;
  for (const auto& [num, obj] : store.all()) {
    auto s = obj.stream();
    if (!s || store.get_name(s->dict, "Type") != "ObjStm") continue;
    std::string body;
    try {
      body = decode_filters(*s);
    } catch (const std::exception&) {
      continue;
    }
    int n = static_cast<int>(store.get_number(s->dict, "N", 0));
    auto first = static_cast<std::size_t>(store.get_number(s->dict, "First", 0));
    Parser header(body);
    std::vector<std::pair<int, std::size_t>> entries;
    for (int k = 0; k < n; ++k) {
      auto a = header.read(false);
      auto b = header.read(false);
      if (!a || !b || !a->number() || !b->number()) break;
      entries.push_back({static_cast<int>(*a->number()), static_cast<std::size_t>(*b->number())});
    }
    for (auto [objnum, offset] : entries) {
      if (first + offset >= body.size()) continue;
      Parser p(body, first + offset);
      if (auto o = p.read(true)) found.push_back({objnum, std::move(*o)});
    }
  }
  for (auto& [num, obj] : found)
    if (!store.has(num)) store.put(num, std::move(obj));
}

struct Inherited {
  const Object* media_box = nullptr;
  const Object* crop_box = nullptr;
  const Dict* resources = nullptr;
};

BBox box_from(const ObjectStore& store, const Object* obj) {
  BBox b{0, 0, 612, 792};
  if (!obj) return b;
  auto arr = store.resolve(*obj).array();
  if (!arr || arr->size() < 4) return b;
  double v[4];
  for (int i = 0; i < 4; ++i) {
    auto n = store.resolve((*arr)[i]).number();
    if (!n) return b;
    v[i] = *n;
  }
  return {std::min(v[0], v[2]), std::min(v[1], v[3]), std::max(v[0], v[2]), std::max(v[1], v[3])};
}

void collect_pages(const ObjectStore& store, const Object& node_ref, Inherited inherited, std::set<int>& visited,
                   std::vector<std::pair<const Dict*, Inherited>>& out, int depth) {
  if (depth > 64) return;
  if (auto r = node_ref.ref()) {
    if (!visited.insert(r->num).second) return;
  }
  const Dict* node = store.dict(node_ref);
  if (!node) return;
  if (auto it = node->find("MediaBox"); it != node->end()) inherited.media_box = &it->second;
  if (auto it = node->find("CropBox"); it != node->end()) inherited.crop_box = &it->second;
  if (auto res = store.get_dict(*node, "Resources")) inherited.resources = res;
  std::string type = store.get_name(*node, "Type");
  auto kids = store.get_array(*node, "Kids");
  if (type == "Pages" || (kids && type != "Page")) {
    if (kids)
      for (const auto& kid : *kids) collect_pages(store, kid, inherited, visited, out, depth + 1);
    return;
  }
  out.push_back({node, inherited});
}

std::string page_content(const ObjectStore& store, const Dict& page) {
  std::string out;
  auto append = [&](const Object& o) {
    auto s = store.resolve(o).stream();
    if (!s) return;
    try {
      out += decode_filters(*s);
      out.push_back('\n');
    } catch (const std::exception&) {
    }
  };
  auto it = page.find("Contents");
  if (it == page.end()) return out;
  const Object& c = store.resolve(it->second);
  if (auto arr = c.array()) {
    for (const auto& part : *arr) append(part);
  } else {
    append(it->second);
  }
  return out;
}

}  // namespace

File parse(std::span<const std::uint8_t> bytes, const ParseOptions& options) {
  if (bytes.empty()) throw Error(ErrorCode::MalformedPdf, "empty input");
  std::string_view data(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  std::size_t header = data.substr(0, std::min<std::size_t>(1024, data.size())).find("%PDF-");
  if (header == std::string_view::npos) throw Error(ErrorCode::MalformedPdf, "missing %PDF header");

  ObjectStore store;
  std::vector<std::pair<std::size_t, Dict>> trailers;
  scan_objects(data, header, store, trailers);
  expand_object_streams(store);

  const Object* root = nullptr;
  const Object* info = nullptr;
  for (const auto& [offset, t] : trailers) {
    if (t.count("Encrypt")) throw Error(ErrorCode::EncryptedPdf, "document is password-protected");
    if (auto it = t.find("Root"); it != t.end()) root = &it->second;
    if (auto it = t.find("Info"); it != t.end()) info = &it->second;
  }
  const Dict* catalog = root ? store.dict(*root) : nullptr;
  if (!catalog) {
    for (const auto& [num, obj] : store.all()) {
      if (auto d = obj.dict(); d && store.get_name(*d, "Type") == "Catalog") {
        catalog = d;
        break;
      }
    }
  }
  if (!catalog) throw Error(ErrorCode::MalformedPdf, "no document catalog");
  auto pages_it = catalog->find("Pages");
  if (pages_it == catalog->end()) throw Error(ErrorCode::MalformedPdf, "catalog has no page tree");

  std::vector<std::pair<const Dict*, Inherited>> page_dicts;
  std::set<int> visited;
  collect_pages(store, pages_it->second, {}, visited, page_dicts, 0);
  if (page_dicts.empty()) throw Error(ErrorCode::MalformedPdf, "document has no pages");

  File file;
  for (const auto& [dict, inherited] : page_dicts) {
    BBox media = box_from(store, inherited.media_box);
    BBox box = media;
    if (inherited.crop_box) {
      BBox crop = box_from(store, inherited.crop_box);
      BBox clipped{std::max(crop.x0, media.x0), std::max(crop.y0, media.y0), std::min(crop.x1, media.x1),
                   std::min(crop.y1, media.y1)};
      if (clipped.valid()) box = clipped;
    }
    if (!box.valid()) box = {0, 0, 612, 792};

    Page raw;
    ContentInterpreter interp(store, options, raw);
    interp.run(page_content(store, *dict), inherited.resources, 0);

    Page page;
    page.width = box.width();
    page.height = box.height();
    for (auto& run : raw.runs) {
      BBox b{std::max(run.bbox.x0 - box.x0, 0.0), std::max(run.bbox.y0 - box.y0, 0.0),
             std::min(run.bbox.x1 - box.x0, page.width), std::min(run.bbox.y1 - box.y0, page.height)};
      if (!b.valid()) continue;
      page.runs.push_back({b, run.text, run.font_size > 0 ? run.font_size : 1.0});
    }
    for (auto& s : raw.rulings) {
      Segment t{std::clamp(s.x0 - box.x0, 0.0, page.width), std::clamp(s.y0 - box.y0, 0.0, page.height),
                std::clamp(s.x1 - box.x0, 0.0, page.width), std::clamp(s.y1 - box.y0, 0.0, page.height)};
      if (t.length() > options.axis_tolerance_pt) page.rulings.push_back(t);
    }
    file.pages.push_back(std::move(page));
  }

  if (info) {
    if (auto d = store.dict(*info)) {
      for (const auto& [key, value] : *d) {
        auto s = store.resolve(value).string();
        if (s) {
          std::string v = decode_text_string(s->bytes);
          if (!text::trim(v).empty()) file.info[key] = v;
        }
      }
    }
  }
  return file;
}

}  // namespace quarry::pdf
