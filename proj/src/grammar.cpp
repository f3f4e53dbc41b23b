#include "gdfuzz/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace gdfuzz {

namespace {

constexpr double kProbTol = 1e-9;

struct Line {
    std::string text;
    int number; // 1-based line of the first physical line
};

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

// Strips '#' comments (quote-aware) and returns physical lines.
std::vector<Line> physical_lines(const std::string& text) {
    std::vector<Line> out;
    std::string cur;
    int lineno = 1;
    bool in_quote = false, escaped = false, in_comment = false;
    for (char c : text) {
        if (c == '\n') {
            out.push_back({cur, lineno});
            cur.clear();
            ++lineno;
            in_quote = escaped = in_comment = false;
            continue;
        }
        if (in_comment) continue;
        if (in_quote) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_quote = false;
            cur.push_back(c);
            continue;
        }
        if (c == '#') {
            in_comment = true;
            continue;
        }
        if (c == '"') in_quote = true;
        cur.push_back(c);
    }
    if (!cur.empty()) out.push_back({cur, lineno});
    return out;
}

// Joins continuation lines (leading '|' or whitespace) onto their rule line.
std::vector<Line> logical_lines(const std::string& text) {
    std::vector<Line> out;
    for (auto& l : physical_lines(text)) {
        bool blank = l.text.find_first_not_of(" \t\r") == std::string::npos;
        if (blank) continue;
        char first = l.text[0];
        bool continuation = (first == '|' || first == ' ' || first == '\t');
        if (continuation && !out.empty()) {
            out.back().text += " ";
            out.back().text += l.text;
        } else {
            out.push_back(l);
        }
    }
    return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw GrammarError("line " + std::to_string(line) + ": " + msg);
}

struct Cursor {
    const std::string& s;
    std::size_t pos = 0;
    int line;

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r')) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() { return s[pos]; }
};

std::string parse_quoted(Cursor& c) {
    // c.peek() == '"'
    ++c.pos;
    std::string out;
    while (true) {
        if (c.pos >= c.s.size()) fail(c.line, "unterminated string literal");
        char ch = c.s[c.pos++];
        if (ch == '"') return out;
        if (ch != '\\') {
            out.push_back(ch);
            continue;
        }
        if (c.pos >= c.s.size()) fail(c.line, "dangling escape in string literal");
        char e = c.s[c.pos++];
        switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'x': {
            if (c.pos + 1 >= c.s.size()) fail(c.line, "truncated \\xHH escape");
            auto hex = [&](char h) -> int {
                if (h >= '0' && h <= '9') return h - '0';
                if (h >= 'a' && h <= 'f') return h - 'a' + 10;
                if (h >= 'A' && h <= 'F') return h - 'A' + 10;
                fail(c.line, "bad hex digit in \\xHH escape");
            };
            int hi = hex(c.s[c.pos]);
            int lo = hex(c.s[c.pos + 1]);
            c.pos += 2;
            out.push_back(static_cast<char>(hi * 16 + lo));
            break;
        }
        default: fail(c.line, std::string("unknown escape \\") + e);
        }
    }
}

std::string parse_ident(Cursor& c) {
    std::size_t begin = c.pos;
    while (c.pos < c.s.size() && is_ident_char(c.s[c.pos])) ++c.pos;
    if (c.pos == begin) fail(c.line, "expected identifier");
    return c.s.substr(begin, c.pos - begin);
}

} // namespace

Grammar load_grammar(const std::string& text) {
    Grammar g;
    std::map<std::string, std::size_t> index;
    // annotated[i][j] holds the literal annotation, NaN for unannotated
    std::vector<std::vector<double>> annotated;
    std::vector<int> rule_line;

    for (auto& l : logical_lines(text)) {
        Cursor c{l.text, 0, l.number};
        c.skip_ws();
        std::string name = parse_ident(c);
        c.skip_ws();
        if (c.done() || c.peek() != '=') fail(l.number, "expected '=' after rule name");
        ++c.pos;

        Rule rule;
        rule.name = name;
        std::vector<double> ann;
        Alternative alt;
        double alt_prob = std::nan("");
        auto close_alt = [&] {
            rule.alternatives.push_back(std::move(alt));
            ann.push_back(alt_prob);
            alt = Alternative{};
            alt_prob = std::nan("");
        };
        while (!c.done()) {
            char ch = c.peek();
            if (ch == '|') {
                ++c.pos;
                close_alt();
            } else if (ch == '@') {
                ++c.pos;
                if (!alt.symbols.empty() || !std::isnan(alt_prob))
                    fail(l.number, "probability annotation must prefix an alternative");
                char* end = nullptr;
                double v = std::strtod(c.s.c_str() + c.pos, &end);
                if (end == c.s.c_str() + c.pos) fail(l.number, "expected number after '@'");
                if (v < 0.0 || v > 1.0 + kProbTol)
                    fail(l.number, "probability annotation outside [0,1]");
                c.pos = end - c.s.c_str();
                alt_prob = v;
            } else if (ch == '"') {
                alt.symbols.push_back(Symbol::term(parse_quoted(c)));
            } else if (is_ident_char(ch)) {
                alt.symbols.push_back(Symbol::nonterm(parse_ident(c)));
            } else {
                fail(l.number, std::string("unexpected character '") + ch + "'");
            }
        }
        close_alt();

        if (index.count(name)) fail(l.number, "duplicate rule '" + name + "'");
        index[name] = g.rules.size();
        g.rules.push_back(std::move(rule));
        annotated.push_back(std::move(ann));
        rule_line.push_back(l.number);
    }
    if (g.rules.empty()) throw GrammarError("empty grammar");

    // resolve nonterminals
    for (std::size_t i = 0; i < g.rules.size(); ++i) {
        for (auto& a : g.rules[i].alternatives) {
            for (auto& s : a.symbols) {
                if (s.terminal) continue;
                auto it = index.find(s.text);
                if (it == index.end())
                    fail(rule_line[i], "undefined nonterminal '" + s.text + "'");
                s.rule = it->second;
            }
        }
    }

    // assign probabilities
    for (std::size_t i = 0; i < g.rules.size(); ++i) {
        auto& alts = g.rules[i].alternatives;
        auto& ann = annotated[i];
        double sum = 0.0;
        std::size_t missing = 0;
        for (double v : ann) {
            if (std::isnan(v)) ++missing;
            else sum += v;
        }
        if (sum > 1.0 + kProbTol)
            fail(rule_line[i], "annotated probabilities of rule '" + g.rules[i].name +
                                   "' sum to more than 1");
        if (missing == alts.size()) {
            for (auto& a : alts) a.probability = 1.0 / static_cast<double>(alts.size());
        } else if (missing > 0) {
            double residual = std::max(0.0, 1.0 - sum);
            for (std::size_t j = 0; j < alts.size(); ++j)
                alts[j].probability =
                    std::isnan(ann[j]) ? residual / static_cast<double>(missing) : ann[j];
        } else {
            if (sum <= 0.0)
                fail(rule_line[i], "rule '" + g.rules[i].name + "' has zero total probability");
            for (std::size_t j = 0; j < alts.size(); ++j)
                alts[j].probability = ann[j] / sum;
        }
    }
    validate(g);
    return g;
}

std::string save_grammar(const Grammar& g) {
    std::string out;
    char buf[64];
    for (const auto& rule : g.rules) {
        out += rule.name;
        out += " =";
        bool first = true;
        for (const auto& alt : rule.alternatives) {
            if (!first) out += " |";
            first = false;
            std::snprintf(buf, sizeof buf, " @%.9f", alt.probability);
            out += buf;
            if (alt.symbols.empty()) {
                out += " \"\"";
            }
            for (const auto& sym : alt.symbols) {
                out += ' ';
                if (!sym.terminal) {
                    out += sym.text;
                    continue;
                }
                out += '"';
                for (char ch : sym.text) {
                    switch (ch) {
                    case '"': out += "\\\""; break;
                    case '\\': out += "\\\\"; break;
                    case '\n': out += "\\n"; break;
                    case '\t': out += "\\t"; break;
                    default:
                        if (static_cast<unsigned char>(ch) < 0x20 ||
                            static_cast<unsigned char>(ch) >= 0x7f) {
                            std::snprintf(buf, sizeof buf, "\\x%02X",
                                          static_cast<unsigned char>(ch));
                            out += buf;
                        } else {
                            out += ch;
                        }
                    }
                }
                out += '"';
            }
        }
        out += '\n';
    }
    return out;
}

Grammar normalize(const Grammar& g) {
    Grammar out = g;
    for (auto& rule : out.rules) {
        double sum = 0.0;
        for (auto& a : rule.alternatives) sum += a.probability;
        if (sum <= 0.0)
            throw GrammarError("cannot normalize all-zero rule '" + rule.name + "'");
        for (auto& a : rule.alternatives) a.probability /= sum;
    }
    return out;
}

Grammar invert_probabilities(const Grammar& g) {
    Grammar out = g;
    for (auto& rule : out.rules) {
        std::size_t j_count = rule.alternatives.size();
        if (j_count <= 1) continue;
        for (auto& a : rule.alternatives)
            a.probability = (1.0 - a.probability) / static_cast<double>(j_count - 1);
    }
    return out;
}

Grammar uniformize_rule(const Grammar& g, std::size_t rule_index) {
    if (rule_index >= g.rules.size())
        throw GrammarError("rule index out of range");
    Grammar out = g;
    auto& alts = out.rules[rule_index].alternatives;
    for (auto& a : alts) a.probability = 1.0 / static_cast<double>(alts.size());
    return out;
}

Grammar mutate_grammar(const Grammar& g, Rng& rng) {
    return uniformize_rule(g, rng.next_index(g.rules.size()));
}

ProbabilityMatrix to_gene(const Grammar& g) {
    ProbabilityMatrix m;
    m.reserve(g.rules.size());
    for (const auto& rule : g.rules) {
        std::vector<double> row;
        row.reserve(rule.alternatives.size());
        for (const auto& a : rule.alternatives) row.push_back(a.probability);
        m.push_back(std::move(row));
    }
    return m;
}

Grammar from_gene(const Grammar& g, const ProbabilityMatrix& m) {
    if (m.size() != g.rules.size()) throw GrammarError("gene matrix row count mismatch");
    Grammar out = g;
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto& alts = out.rules[i].alternatives;
        if (m[i].size() != alts.size())
            throw GrammarError("gene matrix shape mismatch at rule '" + out.rules[i].name + "'");
        double sum = 0.0;
        for (double v : m[i]) sum += v;
        if (std::fabs(sum - 1.0) > kProbTol)
            throw GrammarError("gene row for rule '" + out.rules[i].name +
                               "' is not normalized");
        for (std::size_t j = 0; j < m[i].size(); ++j) alts[j].probability = m[i][j];
    }
    return out;
}

void validate(const Grammar& g) {
    if (g.rules.empty()) throw GrammarError("empty grammar");
    if (g.start_rule >= g.rules.size()) throw GrammarError("start rule out of range");
    for (const auto& rule : g.rules) {
        if (rule.alternatives.empty())
            throw GrammarError("rule '" + rule.name + "' has no alternatives");
        double sum = 0.0;
        for (const auto& a : rule.alternatives) {
            if (a.probability < -kProbTol || a.probability > 1.0 + kProbTol)
                throw GrammarError("probability outside [0,1] in rule '" + rule.name + "'");
            sum += a.probability;
            for (const auto& s : a.symbols) {
                if (!s.terminal && s.rule >= g.rules.size())
                    throw GrammarError("unresolved nonterminal '" + s.text + "' in rule '" +
                                       rule.name + "'");
            }
        }
        if (std::fabs(sum - 1.0) > kProbTol)
            throw GrammarError("probabilities of rule '" + rule.name + "' do not sum to 1");
    }
}

std::size_t find_rule(const Grammar& g, const std::string& name) {
    for (std::size_t i = 0; i < g.rules.size(); ++i)
        if (g.rules[i].name == name) return i;
    return kNoRule;
}

} // namespace gdfuzz
