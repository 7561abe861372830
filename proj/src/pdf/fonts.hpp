#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "store.hpp"

namespace quarry::pdf::detail {

/// Text decoding and glyph metrics for one font resource.
class Font {
 public:
  Font();
  static Font load(const ObjectStore& store, const Dict& font);

  std::vector<unsigned> codes(const std::string& bytes) const;
  /// Horizontal advance in text space units per unit font size.
  double advance(unsigned code) const;
  std::string to_utf8(unsigned code) const;
  bool is_space(unsigned code) const { return !two_byte_ && code == 32; }

  double ascent() const { return ascent_; }
  double descent() const { return descent_; }

 private:
  bool two_byte_ = false;
  std::map<unsigned, double> widths_;
  double default_width_ = 500;
  double width_scale_ = 0.001;
  std::map<unsigned, std::u32string> to_unicode_;
  std::array<char32_t, 256> encoding_{};
  double ascent_ = 0.718;
  double descent_ = -0.207;
};

char32_t winansi_to_unicode(unsigned char code);

}  // namespace quarry::pdf::detail
