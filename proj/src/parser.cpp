#include "gdfuzz/parser.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <unordered_set>

namespace gdfuzz {

namespace {

struct Item {
    std::size_t rule, alt, dot, origin;
    bool operator<(const Item& o) const {
        return std::tie(rule, alt, dot, origin) < std::tie(o.rule, o.alt, o.dot, o.origin);
    }
};

// Recognizer state shared with the derivation builder.
struct Chart {
    const Grammar& g;
    const std::string& input;
    std::vector<std::set<Item>> sets;
    // spans[rule] = set of (start, end) the rule derives
    std::vector<std::set<std::pair<std::size_t, std::size_t>>> spans;

    explicit Chart(const Grammar& g_, const std::string& in)
        : g(g_), input(in), sets(in.size() + 1), spans(g_.rules.size()) {}
};

void run_earley(Chart& c) {
    const auto& g = c.g;
    auto add = [&](std::size_t k, Item it, std::vector<Item>& work) {
        if (c.sets[k].insert(it).second) work.push_back(it);
    };

    std::vector<Item> work;
    for (std::size_t j = 0; j < g.rules[g.start_rule].alternatives.size(); ++j)
        add(0, {g.start_rule, j, 0, 0}, work);

    for (std::size_t k = 0; k <= c.input.size(); ++k) {
        work.assign(c.sets[k].begin(), c.sets[k].end());
        while (!work.empty()) {
            Item it = work.back();
            work.pop_back();
            const auto& symbols = g.rules[it.rule].alternatives[it.alt].symbols;
            if (it.dot == symbols.size()) {
                // completion
                c.spans[it.rule].insert({it.origin, k});
                for (Item parent : c.sets[it.origin]) {
                    const auto& ps = g.rules[parent.rule].alternatives[parent.alt].symbols;
                    if (parent.dot < ps.size() && !ps[parent.dot].terminal &&
                        ps[parent.dot].rule == it.rule)
                        add(k, {parent.rule, parent.alt, parent.dot + 1, parent.origin}, work);
                }
                continue;
            }
            const Symbol& sym = symbols[it.dot];
            if (!sym.terminal) {
                for (std::size_t j = 0; j < g.rules[sym.rule].alternatives.size(); ++j)
                    add(k, {sym.rule, j, 0, k}, work);
                // if already completed at k with an empty span, advance now
                if (c.spans[sym.rule].count({k, k}))
                    add(k, {it.rule, it.alt, it.dot + 1, it.origin}, work);
            } else if (sym.text.empty()) {
                add(k, {it.rule, it.alt, it.dot + 1, it.origin}, work);
            } else if (c.input.compare(k, sym.text.size(), sym.text) == 0) {
                // scan into a future set; processed when k reaches it
                c.sets[k + sym.text.size()].insert(
                    {it.rule, it.alt, it.dot + 1, it.origin});
            }
        }
    }
}

// Canonical derivation: lowest alternative index first, then longest
// nonterminal span. Memoizes failures and rejects in-progress re-entry so
// cyclic derivations (A -> A) fall through to terminal alternatives.
struct Builder {
    const Chart& c;
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> failed, active;

    std::optional<ParseTree> derive(std::size_t rule, std::size_t s, std::size_t e) {
        auto key = std::make_tuple(rule, s, e);
        if (failed.count(key) || active.count(key)) return std::nullopt;
        if (!c.spans[rule].count({s, e})) {
            failed.insert(key);
            return std::nullopt;
        }
        active.insert(key);
        const auto& alts = c.g.rules[rule].alternatives;
        for (std::size_t j = 0; j < alts.size(); ++j) {
            std::vector<ParseTree> children;
            if (match(alts[j].symbols, 0, s, e, children)) {
                active.erase(key);
                ParseTree node;
                node.rule = rule;
                node.alternative = j;
                node.children = std::move(children);
                return node;
            }
        }
        active.erase(key);
        failed.insert(key);
        return std::nullopt;
    }

    bool match(const std::vector<Symbol>& symbols, std::size_t idx, std::size_t at,
               std::size_t e, std::vector<ParseTree>& out) {
        if (idx == symbols.size()) return at == e;
        const Symbol& sym = symbols[idx];
        if (sym.terminal) {
            if (at + sym.text.size() > e ||
                c.input.compare(at, sym.text.size(), sym.text) != 0)
                return false;
            out.push_back(ParseTree::leaf(sym.text));
            if (match(symbols, idx + 1, at + sym.text.size(), e, out)) return true;
            out.pop_back();
            return false;
        }
        // candidate ends, longest first
        std::vector<std::size_t> ends;
        for (auto [s2, e2] : c.spans[sym.rule])
            if (s2 == at && e2 <= e) ends.push_back(e2);
        std::sort(ends.rbegin(), ends.rend());
        for (std::size_t end : ends) {
            auto sub = derive(sym.rule, at, end);
            if (!sub) continue;
            out.push_back(std::move(*sub));
            if (match(symbols, idx + 1, end, e, out)) return true;
            out.pop_back();
        }
        return false;
    }
};

} // namespace

ParseTree parse(const Grammar& g, const std::string& input) {
    Chart chart(g, input);
    run_earley(chart);
    if (!chart.spans[g.start_rule].count({0, input.size()})) {
        std::size_t furthest = 0;
        for (std::size_t k = 0; k < chart.sets.size(); ++k)
            if (!chart.sets[k].empty()) furthest = k;
        furthest = std::min(furthest, input.size());
        throw ParseError(furthest, "parse failure at byte offset " +
                                       std::to_string(furthest));
    }
    Builder b{chart, {}, {}};
    auto tree = b.derive(g.start_rule, 0, input.size());
    if (!tree) throw ParseError(0, "internal error: recognized but underivable");
    return std::move(*tree);
}

std::string unparse(const ParseTree& t) {
    std::string out;
    // explicit stack, single traversal
    std::vector<const ParseTree*> stack{&t};
    while (!stack.empty()) {
        const ParseTree* node = stack.back();
        stack.pop_back();
        if (node->is_terminal()) {
            out += node->bytes;
            continue;
        }
        for (auto it = node->children.rbegin(); it != node->children.rend(); ++it)
            stack.push_back(&*it);
    }
    return out;
}

void check_tree(const Grammar& g, const ParseTree& t) {
    if (t.is_terminal()) return;
    if (t.rule >= g.rules.size()) throw GrammarError("tree rule index out of range");
    const auto& alts = g.rules[t.rule].alternatives;
    if (t.alternative >= alts.size())
        throw GrammarError("tree alternative index out of range");
    const auto& symbols = alts[t.alternative].symbols;
    if (symbols.size() != t.children.size())
        throw GrammarError("tree arity mismatch under rule '" + g.rules[t.rule].name + "'");
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const auto& sym = symbols[i];
        const auto& child = t.children[i];
        if (sym.terminal) {
            if (!child.is_terminal() || child.bytes != sym.text)
                throw GrammarError("terminal leaf mismatch under rule '" +
                                   g.rules[t.rule].name + "'");
        } else {
            if (child.is_terminal() || child.rule != sym.rule)
                throw GrammarError("subtree rule mismatch under rule '" +
                                   g.rules[t.rule].name + "'");
            check_tree(g, child);
        }
    }
}

} // namespace gdfuzz
