#include "fpmax/assembly.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fpmax/errors.hpp"

namespace fpmax::pipe {

namespace {

std::string strip_comment(std::string line) {
    auto h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    return line;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; }

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::uint64_t parse_hex_word(const std::string& tok, int line_no) {
    if (tok.empty() || tok.size() > 16) throw ParseError("bad hex word '" + tok + "'", line_no);
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(tok, &used, 16);
    } catch (const std::exception&) {
        throw ParseError("bad hex word '" + tok + "'", line_no);
    }
    if (used != tok.size() || tok[0] == '-' || tok[0] == '+') throw ParseError("bad hex word '" + tok + "'", line_no);
    return v;
}

std::uint8_t parse_index(const std::string& tok, int line_no) {
    if (tok.empty() || tok.size() > 2 || !std::all_of(tok.begin(), tok.end(), ::isdigit))
        throw ParseError("bad RAM index '" + tok + "'", line_no);
    int v = std::stoi(tok);
    if (v >= kRamWords) throw ParseError("RAM index " + tok + " out of range (0-63)", line_no);
    return static_cast<std::uint8_t>(v);
}

Opcode parse_opcode(const std::string& tok, int line_no) {
    std::string t = lower(tok);
    if (t == "add") return Opcode::Add;
    if (t == "mul") return Opcode::Mul;
    if (t == "muladd") return Opcode::Muladd;
    if (t == "nop") return Opcode::Nop;
    throw ParseError("unknown opcode '" + tok + "'", line_no);
}

void apply_fwd(Instruction& in, const std::string& tok, int line_no) {
    std::string t = lower(tok);
    if (t.rfind("fwd=", 0) != 0) throw ParseError("unexpected token '" + tok + "'", line_no);
    std::string what = t.substr(4);
    if (what == "a") {
        in.fwd_a = true;
    } else if (what == "b") {
        in.fwd_b = true;
    } else if (what == "c") {
        in.fwd_c = Instruction::make_fwd_c(true, 0);
    } else if (what.rfind("c:", 0) == 0) {
        std::string d = what.substr(2);
        if (d.size() != 1 || d[0] < '0' || d[0] > '7')
            throw ParseError("forward distance must be 0-7 in '" + tok + "'", line_no);
        in.fwd_c = Instruction::make_fwd_c(true, d[0] - '0');
    } else {
        throw ParseError("bad forward flag '" + tok + "'", line_no);
    }
}

}  // namespace

std::vector<Instruction> parse_assembly(std::istream& in) {
    std::vector<Instruction> prog;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        line = strip_comment(line);
        std::istringstream is(line);
        std::vector<std::string> toks;
        for (std::string t; is >> t;) toks.push_back(t);
        if (toks.empty()) continue;
        Instruction ins;
        ins.op = parse_opcode(toks[0], n);
        std::size_t k = 1;
        std::size_t nidx = 0;
        while (nidx < 3 && k < toks.size() && lower(toks[k]).rfind("fwd=", 0) != 0) {
            std::uint8_t v = parse_index(toks[k], n);
            (nidx == 0 ? ins.a_idx : nidx == 1 ? ins.b_idx : ins.c_idx) = v;
            ++nidx;
            ++k;
        }
        if (nidx != 3 && !(ins.op == Opcode::Nop && nidx == 0))
            throw ParseError("expected three RAM indices after '" + toks[0] + "'", n);
        for (; k < toks.size(); ++k) apply_fwd(ins, toks[k], n);
        prog.push_back(ins);
    }
    return prog;
}

std::string format_instruction(const Instruction& i) {
    std::ostringstream os;
    os << to_string(i.op) << ' ' << int(i.a_idx) << ' ' << int(i.b_idx) << ' ' << int(i.c_idx);
    if (i.fwd_a) os << " fwd=a";
    if (i.fwd_b) os << " fwd=b";
    if (i.forwards_c()) {
        os << " fwd=c";
        if (i.c_distance()) os << ':' << i.c_distance();
    }
    return os.str();
}

void write_assembly(std::ostream& out, const std::vector<Instruction>& prog) {
    for (const auto& i : prog) out << format_instruction(i) << '\n';
}

std::vector<Instruction> read_program_hex(std::istream& in) {
    std::vector<Instruction> prog;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        line = strip_comment(line);
        std::istringstream is(line);
        std::string tok, extra;
        if (!(is >> tok)) continue;
        if (is >> extra) throw ParseError("one hex word per line expected", n);
        std::uint64_t w = parse_hex_word(tok, n);
        if (w >> 26) throw ParseError("instruction word wider than 26 bits", n);
        prog.push_back(decode_instruction(static_cast<std::uint32_t>(w)));
    }
    return prog;
}

void write_program_hex(std::ostream& out, const std::vector<Instruction>& prog) {
    for (const auto& i : prog)
        out << std::hex << std::setw(8) << std::setfill('0') << encode_instruction(i) << std::dec << '\n';
}

std::vector<Instruction> load_program(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open program file " + path);
    bool hex = path.size() >= 4 && lower(path.substr(path.size() - 4)) == ".hex";
    return hex ? read_program_hex(in) : parse_assembly(in);
}

std::vector<std::uint64_t> read_ram(std::istream& in, const FloatFormat& fmt) {
    std::vector<std::uint64_t> ram(kRamWords, 0);
    std::string line;
    int n = 0, idx = 0;
    while (std::getline(in, line)) {
        ++n;
        line = strip_comment(line);
        if (blank(line)) continue;
        std::istringstream is(line);
        std::string tok, extra;
        is >> tok;
        if (is >> extra) throw ParseError("one hex word per line expected", n);
        if (idx >= kRamWords) throw ParseError("RAM image longer than 64 words", n);
        std::uint64_t w = parse_hex_word(tok, n);
        if (w & ~fmt.width_mask()) throw ParseError("word wider than the " + fmt.name() + " format", n);
        ram[idx++] = w;
    }
    return ram;
}

std::vector<std::uint64_t> read_ram_file(const std::string& path, const FloatFormat& fmt) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open RAM file " + path);
    return read_ram(in, fmt);
}

void write_ram(std::ostream& out, const std::vector<std::uint64_t>& ram, const FloatFormat& fmt) {
    for (auto w : ram) out << std::hex << std::setw(fmt.hex_digits()) << std::setfill('0') << w << std::dec << '\n';
}

}  // namespace fpmax::pipe
