#pragma once

// Table layouts drawn through PdfBuilder. The returned geometry and strings
// are what recognition is expected to recover.

#include <random>
#include <string>
#include <vector>

#include "synthetic_pdf.hpp"

namespace quarry::testing {

using Matrix = std::vector<std::vector<std::string>>;

struct PlacedTable {
  Rect outer;
  std::vector<double> col_x;  // left to right
  std::vector<double> row_y;  // top to bottom
  Matrix cells;
};

/// Random words of letters and digits; about one cell in ten is left empty.
Matrix random_cells(std::mt19937& rng, int rows, int cols, bool allow_empty = true);

/// Fully ruled table: outer rectangle plus every interior row and column line.
PlacedTable draw_ruled_table(PdfBuilder& pdf, double left, double top, const Matrix& cells, double size = 9);

/// Left-aligned columns separated by `gap_chars` average character widths, no rulings.
PlacedTable draw_borderless_table(PdfBuilder& pdf, double left, double top, const Matrix& cells, double size,
                                  double gap_chars);

/// Mean Helvetica advance of the characters in the matrix, at `size`.
double mean_char_width(const Matrix& cells, double size);

}  // namespace quarry::testing
