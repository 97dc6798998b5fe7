#include "fpmax/multiplier.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "fpmax/errors.hpp"
#include "json.hpp"

namespace fpmax::mul {

namespace {

bool ybit(std::uint64_t y, int i) { return i >= 0 && i < 64 && ((y >> i) & 1ULL); }

struct Node {
    Wide v;
    int born = 0;
    int died = std::numeric_limits<int>::max();
};

class Reducer {
public:
    Reducer(const std::vector<Wide>& words, int width, bool detailed) : width_(width), detailed_(detailed) {
        nodes_.reserve(3 * words.size());
        for (const auto& w : words) nodes_.push_back({w.masked(width)});
    }
    std::pair<int, int> add(int a, int b, int c) {
        int t = std::max({nodes_[a].born, nodes_[b].born, nodes_[c].born}) + 1;
        CarrySavePair p = csa(nodes_[a].v, nodes_[b].v, nodes_[c].v, width_);
        nodes_[a].died = nodes_[b].died = nodes_[c].died = t;
        nodes_.push_back({p.sum_word, t});
        nodes_.push_back({p.carry_word, t});
        ++count_;
        return {static_cast<int>(nodes_.size()) - 2, static_cast<int>(nodes_.size()) - 1};
    }

    std::pair<CarrySavePair, ReductionReport> finish(int s, int c, TreeKind kind, int inputs) {
        CarrySavePair pair;
        ReductionReport rep;
        pair.width = width_;
        if (s >= 0) pair.sum_word = nodes_[s].v;
        if (c >= 0) pair.carry_word = nodes_[c].v;
        if (!detailed_) return {pair, rep};
        rep.tree_kind = kind;
        rep.input_words = inputs;
        rep.csa_count = count_;
        int depth = 0;
        for (int i : {s, c})
            if (i >= 0) depth = std::max(depth, nodes_[i].born);
        rep.csa_levels = depth;
        for (int lvl = 0; lvl <= depth; ++lvl) {
            int live = 0;
            for (const auto& n : nodes_)
                if (n.born <= lvl && lvl < n.died) ++live;
            rep.live_words.push_back(live);
        }
        return {pair, rep};
    }

private:
    int width_;
    bool detailed_;
    int count_ = 0;
    std::vector<Node> nodes_;
};

struct ZmPlan {
    std::vector<int> depth;   // depth[m] for m words
    std::vector<int> choice;  // size of the last group, 0 when one array covers all m
};

ZmPlan zm_plan(int n) {
    ZmPlan plan;
    plan.depth.assign(std::max(n + 1, 3), 0);
    plan.choice.assign(std::max(n + 1, 3), 0);
    for (int m = 3; m <= n; ++m) {
        int best = m - 2, pick = 0;
        for (int s = 1; s <= m - 2; ++s) {
            int t = plan.depth[m - s], done;
            if (s >= 3) done = std::max(t, s - 2) + 2;
            else done = t + s;
            if (done < best) {
                best = done;
                pick = s;
            }
        }
        plan.depth[m] = best;
        plan.choice[m] = pick;
    }
    return plan;
}

}  // namespace

std::vector<BoothDigit> booth_encode(std::uint64_t multiplier, int width, int radix_log2) {
    if (radix_log2 != 2 && radix_log2 != 3)
        throw ConfigError("unsupported Booth radix_log2 " + std::to_string(radix_log2) + " (expected 2 or 3)");
    if (width < 1 || width > 64) throw ConfigError("booth_encode: width must be in [1, 64]");
    if (width < 64 && (multiplier >> width)) throw ContractError("booth_encode: multiplier wider than width");
    const int k = radix_log2;
    const int n = (width + 1 + k - 1) / k;
    std::vector<BoothDigit> digits(n);
    for (int i = 0; i < n; ++i) {
        int base = k * i;
        int d = ybit(multiplier, base - 1) ? 1 : 0;
        for (int j = 0; j < k - 1; ++j) d += ybit(multiplier, base + j) ? (1 << j) : 0;
        d -= ybit(multiplier, base + k - 1) ? (1 << (k - 1)) : 0;
        digits[i] = {d, k};
    }
    return digits;
}

PartialProducts gen_partial_products(std::uint64_t multiplicand, const std::vector<BoothDigit>& digits,
                                     int acc_width) {
    PartialProducts pp;
    if (digits.empty()) return pp;
    const int k = digits.front().radix_log2;
    if (acc_width <= 0)
        acc_width = static_cast<int>(std::bit_width(multiplicand)) + k * static_cast<int>(digits.size()) + 1;
    if (acc_width > Wide::kBits) throw ContractError("gen_partial_products: accumulator wider than 192 bits");
    pp.acc_width = acc_width;
    const Wide m(multiplicand);
    if (k == 3) {
        pp.uses_hard_multiple = true;
        pp.hard_multiple = m + (m << 1);
    }
    for (std::size_t i = 0; i < digits.size(); ++i) {
        const BoothDigit& d = digits[i];
        if (d.radix_log2 != k) throw ContractError("gen_partial_products: mixed radices");
        int mag = d.value < 0 ? -d.value : d.value;
        Wide v;
        switch (mag) {
            case 0: break;
            case 1: v = m; break;
            case 2: v = m << 1; break;
            case 3: v = pp.hard_multiple; break;
            case 4: v = m << 2; break;
            default: throw ContractError("gen_partial_products: digit out of range");
        }
        PartialProductRow row;
        row.shift = k * static_cast<int>(i);
        if (d.value < 0) {
            row.magnitude = (~v).masked(acc_width - row.shift);
            row.sign_fix = true;
        } else {
            row.magnitude = v;
        }
        pp.rows.push_back(row);
    }
    return pp;
}

CarrySavePair csa(const Wide& a, const Wide& b, const Wide& c, int width) {
    CarrySavePair p;
    p.width = width;
    p.sum_word = (a ^ b ^ c).masked(width);
    p.carry_word = (((a & b) | (a & c) | (b & c)) << 1).masked(width);
    return p;
}

TreeKind parse_tree_kind(std::string_view s) {
    std::string n(s);
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (n == "wallace") return TreeKind::Wallace;
    if (n == "array") return TreeKind::Array;
    if (n == "zm") return TreeKind::ZM;
    throw ConfigError("unknown tree kind '" + std::string(s) + "' (expected wallace, array or zm)");
}

const char* to_string(TreeKind t) {
    switch (t) {
        case TreeKind::Wallace: return "wallace";
        case TreeKind::Array: return "array";
        case TreeKind::ZM: return "zm";
    }
    return "?";
}

std::string ReductionReport::to_json() const {
    nlohmann::json j{{"tree_kind", to_string(tree_kind)},
                     {"input_words", input_words},
                     {"csa_levels", csa_levels},
                     {"csa_count", csa_count},
                     {"live_words", live_words}};
    return j.dump();
}

std::vector<Wide> rows_to_words(const std::vector<PartialProductRow>& rows, int width) {
    std::vector<Wide> words;
    words.reserve(rows.size() + 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Wide w = (rows[i].magnitude << rows[i].shift).masked(width);
        if (i > 0 && rows[i - 1].sign_fix) {
            if (rows[i - 1].shift >= rows[i].shift) throw ContractError("rows_to_words: rows not ascending");
            w.set_bit(rows[i - 1].shift);
        }
        words.push_back(w);
    }
    if (!rows.empty() && rows.back().sign_fix) words.push_back(Wide::bit_at(rows.back().shift).masked(width));
    return words;
}

std::vector<int> zm_groups(int n) {
    if (n <= 2) return {n};
    ZmPlan plan = zm_plan(n);
    std::vector<int> groups;
    int m = n;
    while (plan.choice[m] != 0) {
        groups.push_back(plan.choice[m]);
        m -= plan.choice[m];
    }
    groups.push_back(m);
    std::reverse(groups.begin(), groups.end());
    return groups;
}

int zm_depth(int n) { return n <= 2 ? 0 : zm_plan(n).depth[n]; }

namespace {

std::pair<CarrySavePair, ReductionReport> run_tree(const std::vector<Wide>& words, TreeKind tree, int width,
                                                   bool detailed) {
    if (words.empty()) throw ContractError("reduce: at least one row required");
    Reducer r(words, width, detailed);
    const int n = static_cast<int>(words.size());
    if (n == 1) return r.finish(0, -1, tree, n);
    if (n == 2) return r.finish(0, 1, tree, n);

    switch (tree) {
        case TreeKind::Wallace: {
            std::vector<int> level(n);
            for (int i = 0; i < n; ++i) level[i] = i;
            while (level.size() > 2) {
                std::vector<int> next;
                std::size_t i = 0;
                for (; i + 3 <= level.size(); i += 3) {
                    auto [s, c] = r.add(level[i], level[i + 1], level[i + 2]);
                    next.push_back(s);
                    next.push_back(c);
                }
                for (; i < level.size(); ++i) next.push_back(level[i]);
                level = std::move(next);
            }
            return r.finish(level[0], level[1], tree, n);
        }
        case TreeKind::Array: {
            auto [s, c] = r.add(0, 1, 2);
            for (int i = 3; i < n; ++i) std::tie(s, c) = r.add(s, c, i);
            return r.finish(s, c, tree, n);
        }
        case TreeKind::ZM: {
            // Each group is a short linear array running in parallel; a second
            // linear array absorbs the group outputs in order of readiness.
            std::vector<int> groups = zm_groups(n);
            int next = 0;
            auto array_group = [&](int size) -> std::pair<int, int> {
                int first = next;
                next += size;
                if (size == 1) return {first, -1};
                if (size == 2) return {first, first + 1};
                auto [s, c] = r.add(first, first + 1, first + 2);
                for (int i = first + 3; i < first + size; ++i) std::tie(s, c) = r.add(s, c, i);
                return {s, c};
            };
            auto [s, c] = array_group(groups[0]);
            for (std::size_t g = 1; g < groups.size(); ++g) {
                auto [x, y] = array_group(groups[g]);
                std::tie(s, c) = r.add(s, c, x);
                if (y >= 0) std::tie(s, c) = r.add(s, c, y);
            }
            return r.finish(s, c, tree, n);
        }
    }
    throw ConfigError("unknown tree kind");
}

}  // namespace

std::pair<CarrySavePair, ReductionReport> reduce_words(const std::vector<Wide>& words, TreeKind tree, int width) {
    return run_tree(words, tree, width, true);
}

CarrySavePair reduce_value(const std::vector<Wide>& words, TreeKind tree, int width) {
    return run_tree(words, tree, width, false).first;
}

std::pair<CarrySavePair, ReductionReport> reduce(const PartialProducts& pp, TreeKind tree) {
    return reduce_words(rows_to_words(pp.rows, pp.acc_width), tree, pp.acc_width);
}

Wide final_add(const CarrySavePair& pair) { return pair.value(); }

Wide multiply(std::uint64_t x, std::uint64_t y, int width, int radix_log2, TreeKind tree, ReductionReport* report) {
    PartialProducts pp = gen_partial_products(x, booth_encode(y, width, radix_log2));
    auto [pair, rep] = reduce(pp, tree);
    if (report) *report = rep;
    return final_add(pair);
}

}  // namespace fpmax::mul
