#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fpmax/wide_uint.hpp"

namespace fpmax::mul {

struct BoothDigit {
    int value = 0;
    int radix_log2 = 2;
    friend bool operator==(const BoothDigit&, const BoothDigit&) = default;
};

// Recodes an unsigned multiplier (0 appended below the LSB, zero-extended
// above) into ceil((width+1)/radix_log2) signed digits, least significant
// first. Throws ConfigError for radices other than 2 and 3.
std::vector<BoothDigit> booth_encode(std::uint64_t multiplier, int width, int radix_log2);

struct PartialProductRow {
    Wide magnitude;  // |d|*M, or its one's complement for negative digits
    int shift = 0;
    bool sign_fix = false;
};

struct PartialProducts {
    std::vector<PartialProductRow> rows;
    int acc_width = 0;   // rows are defined mod 2^acc_width
    bool uses_hard_multiple = false;
    Wide hard_multiple;  // 3M, produced by one extra carry-propagate addition
};

// Sum over rows of (magnitude + sign_fix) << shift equals multiplicand *
// multiplier mod 2^acc_width. acc_width defaults to the exact product width
// plus one.
PartialProducts gen_partial_products(std::uint64_t multiplicand, const std::vector<BoothDigit>& digits,
                                     int acc_width = 0);

struct CarrySavePair {
    Wide sum_word;
    Wide carry_word;
    int width = Wide::kBits;
    Wide value() const { return (sum_word + carry_word).masked(width); }
};

CarrySavePair csa(const Wide& a, const Wide& b, const Wide& c, int width = Wide::kBits);

enum class TreeKind { Wallace, Array, ZM };

TreeKind parse_tree_kind(std::string_view s);
const char* to_string(TreeKind t);

struct ReductionReport {
    TreeKind tree_kind = TreeKind::Wallace;
    int input_words = 0;
    int csa_levels = 0;  // longest chain of 3:2 compressors
    int csa_count = 0;
    // Words still live after each level, index 0 being the input.
    std::vector<int> live_words;
    std::string to_json() const;
};

// Rows become words: each row shifted into place, a row's sign_fix bit folded
// into the next row's vacant low bits, and an extra word for the last row's
// sign_fix when it is set.
std::vector<Wide> rows_to_words(const std::vector<PartialProductRow>& rows, int width);

std::pair<CarrySavePair, ReductionReport> reduce_words(const std::vector<Wide>& words, TreeKind tree, int width);
std::pair<CarrySavePair, ReductionReport> reduce(const PartialProducts& pp, TreeKind tree);
// Same tree walk without building the report; used on the hot datapath path.
CarrySavePair reduce_value(const std::vector<Wide>& words, TreeKind tree, int width);

Wide final_add(const CarrySavePair& pair);

// Convenience: full Booth multiply through the chosen tree.
Wide multiply(std::uint64_t x, std::uint64_t y, int width, int radix_log2, TreeKind tree,
              ReductionReport* report = nullptr);

// Group sizes used by the ZM combiner for n words (sum = n), first group first.
std::vector<int> zm_groups(int n);
// Depth of the ZM combiner for n words.
int zm_depth(int n);

}  // namespace fpmax::mul
