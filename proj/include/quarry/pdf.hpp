#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "quarry/geometry.hpp"

namespace quarry::pdf {

/// One text-showing run after device-space transformation.
struct TextRun {
  BBox bbox;
  std::string text;  // UTF-8
  double font_size = 0;
};

struct Page {
  double width = 0;
  double height = 0;
  std::vector<TextRun> runs;
  std::vector<Segment> rulings;
};

struct File {
  std::vector<Page> pages;
  /// Document information dictionary (Title, Author, Subject, CreationDate...), UTF-8.
  std::map<std::string, std::string> info;
};

struct ParseOptions {
  /// Strokes within this distance of horizontal/vertical count as rulings.
  double axis_tolerance_pt = 0.5;
  /// Filled rectangles thinner than this are treated as rulings.
  double thin_fill_pt = 2.0;
};

/// Parses PDF bytes into positioned text runs and ruling segments.
/// Throws Error{MalformedPdf} or Error{EncryptedPdf}.
File parse(std::span<const std::uint8_t> bytes, const ParseOptions& options = {});

/// Width in 1/1000 em of a WinAnsi code in the standard Helvetica metrics.
int helvetica_width(unsigned char code);

}  // namespace quarry::pdf
