#include "localseg/raster.hpp"

#include <string>

namespace localseg {

std::string Size::str() const { return std::to_string(width) + "x" + std::to_string(height); }

std::string BBox::str() const {
  return "[" + std::to_string(x0) + "," + std::to_string(y0) + "," + std::to_string(x1) + "," +
         std::to_string(y1) + ")";
}

std::string_view to_string(Polarity p) {
  return p == Polarity::positive ? "positive" : "negative";
}

Polarity parse_polarity(std::string_view s) {
  if (s == "positive" || s == "pos" || s == "+") return Polarity::positive;
  if (s == "negative" || s == "neg" || s == "-") return Polarity::negative;
  throw std::invalid_argument("unknown click polarity '" + std::string(s) +
                              "' (expected positive or negative)");
}

}  // namespace localseg
