#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fpmax/ieee.hpp"

namespace fpmax {

// One line of a golden-vector file: `fmt a b c mode expected flags`, lowercase
// hex operands, flags as one hex digit (invalid|overflow|underflow|inexact).
struct GoldenVector {
    FloatFormat fmt = FloatFormat::SP();
    std::uint64_t a = 0, b = 0, c = 0;
    RoundingMode mode = RoundingMode::NearestEven;
    std::uint64_t expected = 0;
    ExceptionFlags flags;
};

GoldenVector parse_golden_line(std::string_view line, int line_no = 0);
std::string format_golden_line(const GoldenVector& v);

// Skips blank lines and `#` comments. Throws ParseError with the line number.
std::vector<GoldenVector> read_golden(std::istream& in);
std::vector<GoldenVector> read_golden_file(const std::string& path);
void write_golden(std::ostream& out, const std::vector<GoldenVector>& vs);

}  // namespace fpmax
