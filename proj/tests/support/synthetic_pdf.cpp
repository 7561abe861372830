#include "synthetic_pdf.hpp"

#include <cstdio>
#include <stdexcept>

#include <zlib.h>

namespace quarry::testing {

namespace {

constexpr int kWidths[95] = {
    278, 278, 355, 556, 556, 889, 667, 191, 333, 333, 389, 584, 278, 333, 278, 278, 556, 556, 556,
    556, 556, 556, 556, 556, 556, 556, 278, 278, 584, 584, 584, 556, 1015, 667, 667, 722, 722, 667,
    611, 778, 722, 278, 500, 667, 556, 833, 722, 778, 667, 778, 722, 667, 611, 722, 667, 944, 667,
    667, 611, 278, 278, 278, 469, 556, 333, 556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500,
    222, 833, 556, 556, 556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500, 334, 260, 334, 584};

int width_of(unsigned char c) {
  if (c >= 32 && c <= 126) return kWidths[c - 32];
  if (c == 0xB0) return 400;
  if (c == 0xBA) return 365;
  return 556;
}

/// UTF-8 to WinAnsi (Latin-1 subset); unsupported code points become '?'.
std::string to_winansi(const std::string& utf8) {
  std::string out;
  for (std::size_t i = 0; i < utf8.size();) {
    auto c = static_cast<unsigned char>(utf8[i]);
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
      ++i;
    } else if ((c & 0xE0) == 0xC0 && i + 1 < utf8.size()) {
      unsigned cp = ((c & 0x1F) << 6) | (static_cast<unsigned char>(utf8[i + 1]) & 0x3F);
      out.push_back(cp >= 0xA0 && cp <= 0xFF ? static_cast<char>(cp) : '?');
      i += 2;
    } else {
      out.push_back('?');
      ++i;
      while (i < utf8.size() && (static_cast<unsigned char>(utf8[i]) & 0xC0) == 0x80) ++i;
    }
  }
  return out;
}

std::string escape(const std::string& bytes) {
  std::string out;
  for (char c : bytes) {
    if (c == '(' || c == ')' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

}  // namespace

double PdfBuilder::text_width(const std::string& utf8, double size) {
  double w = 0;
  for (char c : to_winansi(utf8)) w += width_of(static_cast<unsigned char>(c));
  return w * size / 1000.0;
}

Rect PdfBuilder::text_box(double x, double baseline, double size, const std::string& utf8) {
  return {x, baseline - 0.207 * size, x + text_width(utf8, size), baseline + 0.718 * size};
}

PdfBuilder& PdfBuilder::page(double width, double height) {
  pages_.push_back({width, height, {}});
  placed_.emplace_back();
  return *this;
}

PdfBuilder& PdfBuilder::text(double x, double baseline, double size, const std::string& utf8) {
  if (pages_.empty()) page();
  pages_.back().content += "BT /F1 " + num(size) + " Tf " + num(x) + " " + num(baseline) + " Td (" +
                           escape(to_winansi(utf8)) + ") Tj ET\n";
  placed_.back().push_back({x, baseline, size, utf8, text_box(x, baseline, size, utf8)});
  return *this;
}

PdfBuilder& PdfBuilder::line(double x0, double y0, double x1, double y1) {
  if (pages_.empty()) page();
  pages_.back().content += num(x0) + " " + num(y0) + " m " + num(x1) + " " + num(y1) + " l S\n";
  return *this;
}

PdfBuilder& PdfBuilder::rect(double x, double y, double w, double h) {
  if (pages_.empty()) page();
  pages_.back().content += num(x) + " " + num(y) + " " + num(w) + " " + num(h) + " re S\n";
  return *this;
}

PdfBuilder& PdfBuilder::info(const std::string& key, const std::string& value) {
  info_[key] = value;
  return *this;
}

PdfBuilder& PdfBuilder::compress(bool on) {
  compress_ = on;
  return *this;
}

PdfBuilder& PdfBuilder::encrypted(bool on) {
  encrypted_ = on;
  return *this;
}

std::vector<std::uint8_t> PdfBuilder::build() const {
  std::vector<std::string> objects;  // body of object i+1
  std::vector<PageData> pages = pages_;
  if (pages.empty()) pages.push_back({612, 792, {}});

  // 1 catalog, 2 pages, 3 font, then per page: page + content, then info.
  objects.push_back("<< /Type /Catalog /Pages 2 0 R >>");
  std::string kids;
  for (std::size_t i = 0; i < pages.size(); ++i) kids += std::to_string(4 + 2 * i) + " 0 R ";
  objects.push_back("<< /Type /Pages /Kids [" + kids + "] /Count " + std::to_string(pages.size()) + " >>");
  std::string widths;
  for (int c = 32; c <= 255; ++c) widths += std::to_string(width_of(static_cast<unsigned char>(c))) + " ";
  objects.push_back(
      "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica /Encoding /WinAnsiEncoding /FirstChar 32 "
      "/LastChar 255 /Widths [" + widths + "] >>");
  for (std::size_t i = 0; i < pages.size(); ++i) {
    const auto& p = pages[i];
    objects.push_back("<< /Type /Page /Parent 2 0 R /MediaBox [0 0 " + num(p.width) + " " + num(p.height) +
                      "] /Resources << /Font << /F1 3 0 R >> >> /Contents " + std::to_string(5 + 2 * i) +
                      " 0 R >>");
    std::string data = p.content;
    std::string filter;
    if (compress_) {
      uLongf len = compressBound(static_cast<uLong>(data.size()));
      std::string out(len, '\0');
      if (::compress(reinterpret_cast<Bytef*>(out.data()), &len, reinterpret_cast<const Bytef*>(data.data()),
                     static_cast<uLong>(data.size())) != Z_OK)
        throw std::runtime_error("compress failed");
      out.resize(len);
      data = out;
      filter = " /Filter /FlateDecode";
    }
    objects.push_back("<< /Length " + std::to_string(data.size()) + filter + " >>\nstream\n" + data +
                      "\nendstream");
  }
  int info_obj = 0;
  if (!info_.empty()) {
    std::string d = "<< ";
    for (const auto& [k, v] : info_) d += "/" + k + " (" + escape(to_winansi(v)) + ") ";
    d += ">>";
    objects.push_back(d);
    info_obj = static_cast<int>(objects.size());
  }
  int encrypt_obj = 0;
  if (encrypted_) {
    objects.push_back("<< /Filter /Standard /V 1 /R 2 /O (x) /U (y) /P -4 >>");
    encrypt_obj = static_cast<int>(objects.size());
  }

  std::string out = "%PDF-1.4\n%\xE2\xE3\xCF\xD3\n";
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    offsets.push_back(out.size());
    out += std::to_string(i + 1) + " 0 obj\n" + objects[i] + "\nendobj\n";
  }
  std::size_t xref = out.size();
  out += "xref\n0 " + std::to_string(objects.size() + 1) + "\n0000000000 65535 f \n";
  for (auto off : offsets) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%010zu 00000 n \n", off);
    out += buf;
  }
  out += "trailer\n<< /Size " + std::to_string(objects.size() + 1) + " /Root 1 0 R";
  if (info_obj) out += " /Info " + std::to_string(info_obj) + " 0 R";
  if (encrypt_obj) out += " /Encrypt " + std::to_string(encrypt_obj) + " 0 R";
  out += " >>\nstartxref\n" + std::to_string(xref) + "\n%%EOF\n";
  return {out.begin(), out.end()};
}

}  // namespace quarry::testing
