#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpmax/ieee.hpp"
#include "fpmax/pipeline.hpp"

namespace fpmax::pipe {

// `OP a b c [fwd=a] [fwd=b] [fwd=c[:dist]]`, '#' to end of line is a comment.
// OP is add, mul, muladd or nop (any case); nop takes no indices or three.
std::vector<Instruction> parse_assembly(std::istream& in);
std::string format_instruction(const Instruction& i);
void write_assembly(std::ostream& out, const std::vector<Instruction>& prog);

// One instruction per line as an 8-digit hex word.
std::vector<Instruction> read_program_hex(std::istream& in);
void write_program_hex(std::ostream& out, const std::vector<Instruction>& prog);

// Reads hex words when the path ends in .hex, assembly otherwise.
std::vector<Instruction> load_program(const std::string& path);

// 64 lines of hex words; missing trailing lines read as zero.
std::vector<std::uint64_t> read_ram(std::istream& in, const FloatFormat& fmt);
std::vector<std::uint64_t> read_ram_file(const std::string& path, const FloatFormat& fmt);
void write_ram(std::ostream& out, const std::vector<std::uint64_t>& ram, const FloatFormat& fmt);

}  // namespace fpmax::pipe
