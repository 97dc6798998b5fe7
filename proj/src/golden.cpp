#include "fpmax/golden.hpp"

#include <fstream>
#include <sstream>

#include "fpmax/errors.hpp"

namespace fpmax {

namespace {

std::uint64_t parse_hex(const std::string& tok, int line_no) {
    if (tok.empty() || tok.size() > 16) throw ParseError("bad hex field '" + tok + "'", line_no);
    std::uint64_t v = 0;
    for (char ch : tok) {
        int d;
        if (ch >= '0' && ch <= '9') d = ch - '0';
        else if (ch >= 'a' && ch <= 'f') d = ch - 'a' + 10;
        else if (ch >= 'A' && ch <= 'F') d = ch - 'A' + 10;
        else throw ParseError("bad hex field '" + tok + "'", line_no);
        v = (v << 4) | static_cast<std::uint64_t>(d);
    }
    return v;
}

std::string hex(std::uint64_t v, int digits) {
    std::ostringstream os;
    os << std::hex;
    os.width(digits);
    os.fill('0');
    os << v;
    return os.str();
}

}  // namespace

GoldenVector parse_golden_line(std::string_view line, int line_no) {
    std::istringstream is{std::string(line)};
    std::string f, a, b, c, m, e, fl, extra;
    if (!(is >> f >> a >> b >> c >> m >> e >> fl) || (is >> extra))
        throw ParseError("expected 7 fields: fmt a b c mode expected flags", line_no);
    GoldenVector v;
    try {
        v.fmt = FloatFormat::from_name(f);
        v.mode = parse_rounding_mode(m);
    } catch (const Error& err) {
        throw ParseError(err.what(), line_no);
    }
    v.a = parse_hex(a, line_no);
    v.b = parse_hex(b, line_no);
    v.c = parse_hex(c, line_no);
    v.expected = parse_hex(e, line_no);
    std::uint64_t flags = parse_hex(fl, line_no);
    if (flags > 0xF) throw ParseError("flags field must be one hex digit", line_no);
    v.flags = ExceptionFlags::from_bits(static_cast<unsigned>(flags));
    std::uint64_t mask = v.fmt.width_mask();
    if ((v.a | v.b | v.c | v.expected) & ~mask) throw ParseError("operand wider than format", line_no);
    return v;
}

std::string format_golden_line(const GoldenVector& v) {
    int d = v.fmt.hex_digits();
    return v.fmt.name() + " " + hex(v.a, d) + " " + hex(v.b, d) + " " + hex(v.c, d) + " " + to_string(v.mode) +
           " " + hex(v.expected, d) + " " + hex(v.flags.to_bits(), 1);
}

std::vector<GoldenVector> read_golden(std::istream& in) {
    std::vector<GoldenVector> out;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse_golden_line(line, n));
    }
    return out;
}

std::vector<GoldenVector> read_golden_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open golden file " + path);
    return read_golden(in);
}

void write_golden(std::ostream& out, const std::vector<GoldenVector>& vs) {
    for (const auto& v : vs) out << format_golden_line(v) << '\n';
}

}  // namespace fpmax
