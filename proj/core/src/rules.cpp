#include "tlscheck/rules.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace tlscheck {

namespace {

struct Token {
    enum class Kind { Ident, PatternId, String, Punct, HexByte, HexWild, End };
    Kind kind = Kind::End;
    std::string text;
    uint8_t byte = 0;
    size_t line = 1;
};

class Lexer {
public:
    Lexer(const std::string& src) : src_(src) {}

    size_t line() const { return line_; }
    bool hex_mode = false; // inside { ... } hex strings

    Token next() {
        skip_ws();
        Token t;
        t.line = line_;
        if (pos_ >= src_.size()) return t;

        char c = src_[pos_];
        if (hex_mode) {
            if (c == '}' || c == '{') {
                ++pos_;
                t.kind = Token::Kind::Punct;
                t.text = c;
                return t;
            }
            if (c == '?') {
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '?') {
                    pos_ += 2;
                    t.kind = Token::Kind::HexWild;
                    return t;
                }
                throw UnsupportedConstruct(line_, "nibble wildcard");
            }
            if (c == '[') throw UnsupportedConstruct(line_, "hex jump");
            if (c == '(' || c == '|') throw UnsupportedConstruct(line_, "hex alternation");
            if (std::isxdigit(static_cast<unsigned char>(c))) {
                if (pos_ + 1 >= src_.size() || !std::isxdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
                    if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '?')
                        throw UnsupportedConstruct(line_, "nibble wildcard");
                    throw RuleParseError(line_, "incomplete hex byte");
                }
                t.kind = Token::Kind::HexByte;
                t.byte = uint8_t(std::stoul(src_.substr(pos_, 2), nullptr, 16));
                pos_ += 2;
                return t;
            }
            throw RuleParseError(line_, std::string("unexpected character in hex string: '") + c + "'");
        }

        if (c == '$' || c == '#' || c == '@' || c == '!') {
            size_t start = pos_++;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            std::string name = src_.substr(start, pos_ - start);
            if (c == '#') throw UnsupportedConstruct(t.line, "count expression");
            if (c == '@') throw UnsupportedConstruct(t.line, "offset expression");
            if (c == '!') throw UnsupportedConstruct(t.line, "length expression");
            if (name.size() == 1) throw RuleParseError(t.line, "bare '$' pattern sets are unsupported");
            if (pos_ < src_.size() && src_[pos_] == '*') throw UnsupportedConstruct(t.line, "pattern wildcard set");
            t.kind = Token::Kind::PatternId;
            t.text = name;
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            t.kind = Token::Kind::Ident;
            t.text = src_.substr(start, pos_ - start);
            return t;
        }
        if (c == '"') {
            ++pos_;
            std::string value;
            while (true) {
                if (pos_ >= src_.size()) throw RuleParseError(line_, "unterminated string literal");
                char d = src_[pos_++];
                if (d == '"') break;
                if (d == '\n') throw RuleParseError(line_, "unterminated string literal");
                if (d == '\\') {
                    if (pos_ >= src_.size()) throw RuleParseError(line_, "bad escape");
                    char e = src_[pos_++];
                    switch (e) {
                    case '"': value.push_back('"'); break;
                    case '\\': value.push_back('\\'); break;
                    case 't': value.push_back('\t'); break;
                    case 'n': value.push_back('\n'); break;
                    case 'x': {
                        if (pos_ + 1 >= src_.size()) throw RuleParseError(line_, "bad \\x escape");
                        value.push_back(char(std::stoul(src_.substr(pos_, 2), nullptr, 16)));
                        pos_ += 2;
                        break;
                    }
                    default: throw RuleParseError(line_, std::string("bad escape: \\") + e);
                    }
                    continue;
                }
                value.push_back(d);
            }
            t.kind = Token::Kind::String;
            t.text = value;
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)))
            throw UnsupportedConstruct(line_, "numeric expression");
        static const std::string punct = "{}()=:";
        if (punct.find(c) != std::string::npos) {
            ++pos_;
            t.kind = Token::Kind::Punct;
            t.text = c;
            return t;
        }
        throw RuleParseError(line_, std::string("unexpected character: '") + c + "'");
    }

private:
    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') { ++line_; ++pos_; continue; }
            if (std::isspace(static_cast<unsigned char>(c))) { ++pos_; continue; }
            if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;
            }
            if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                pos_ += 2;
                while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) {
                    if (src_[pos_] == '\n') ++line_;
                    ++pos_;
                }
                if (pos_ + 1 >= src_.size()) throw RuleParseError(line_, "unterminated comment");
                pos_ += 2;
                continue;
            }
            break;
        }
    }

    const std::string& src_;
    size_t pos_ = 0;
    size_t line_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) { advance(); }

    RuleSet parse() {
        RuleSet set;
        std::set<std::string> names;
        while (cur_.kind != Token::Kind::End) {
            if (cur_.kind != Token::Kind::Ident)
                throw RuleParseError(cur_.line, "expected 'rule'");
            if (cur_.text == "import" || cur_.text == "include")
                throw UnsupportedConstruct(cur_.line, "module " + cur_.text);
            if (cur_.text == "global" || cur_.text == "private")
                throw UnsupportedConstruct(cur_.line, "rule modifier '" + cur_.text + "'");
            if (cur_.text != "rule")
                throw RuleParseError(cur_.line, "expected 'rule', got '" + cur_.text + "'");
            advance();
            Rule rule = parse_rule();
            if (!names.insert(rule.name).second)
                throw RuleParseError(cur_.line, "duplicate rule name: " + rule.name);
            set.rules.push_back(std::move(rule));
        }
        return set;
    }

private:
    Lexer lex_;
    Token cur_;

    void advance() { cur_ = lex_.next(); }

    void expect_punct(char c) {
        if (cur_.kind != Token::Kind::Punct || cur_.text[0] != c)
            throw RuleParseError(cur_.line, std::string("expected '") + c + "'");
        advance();
    }

    bool at_ident(const char* word) const {
        return cur_.kind == Token::Kind::Ident && cur_.text == word;
    }

    Rule parse_rule() {
        if (cur_.kind != Token::Kind::Ident)
            throw RuleParseError(cur_.line, "expected rule name");
        Rule rule;
        rule.name = cur_.text;
        advance();
        if (cur_.kind == Token::Kind::Punct && cur_.text[0] == ':')
            throw UnsupportedConstruct(cur_.line, "rule tags");
        expect_punct('{');

        bool have_condition = false;
        while (!(cur_.kind == Token::Kind::Punct && cur_.text[0] == '}')) {
            if (at_ident("meta")) {
                advance();
                expect_punct(':');
                skip_meta();
            } else if (at_ident("strings")) {
                advance();
                expect_punct(':');
                parse_strings(rule);
            } else if (at_ident("condition")) {
                advance();
                expect_punct(':');
                rule.condition = parse_expr(rule);
                have_condition = true;
            } else if (cur_.kind == Token::Kind::End) {
                throw RuleParseError(cur_.line, "unterminated rule " + rule.name);
            } else {
                throw RuleParseError(cur_.line, "unexpected token in rule body");
            }
        }
        advance(); // '}'
        if (!have_condition)
            throw RuleParseError(cur_.line, "rule " + rule.name + " has no condition");
        return rule;
    }

    void skip_meta() {
        // ident = "string"  (until the next section keyword)
        while (cur_.kind == Token::Kind::Ident && !at_ident("strings") && !at_ident("condition")) {
            advance();
            expect_punct('=');
            if (cur_.kind != Token::Kind::String)
                throw UnsupportedConstruct(cur_.line, "non-string meta value");
            advance();
        }
    }

    void parse_strings(Rule& rule) {
        std::set<std::string> ids;
        while (cur_.kind == Token::Kind::PatternId) {
            Pattern p;
            p.id = cur_.text;
            if (!ids.insert(p.id).second)
                throw RuleParseError(cur_.line, "duplicate pattern id " + p.id);
            advance();
            expect_punct('=');
            if (cur_.kind == Token::Kind::String) {
                p.kind = Pattern::Kind::Text;
                p.text = cur_.text;
                advance();
                while (cur_.kind == Token::Kind::Ident && is_modifier(cur_.text)) {
                    if (cur_.text == "nocase") p.kind = Pattern::Kind::TextNoCase;
                    else throw UnsupportedConstruct(cur_.line, "string modifier '" + cur_.text + "'");
                    advance();
                }
            } else if (cur_.kind == Token::Kind::Punct && cur_.text[0] == '{') {
                lex_.hex_mode = true;
                advance();
                p.kind = Pattern::Kind::Hex;
                while (true) {
                    if (cur_.kind == Token::Kind::HexByte) {
                        p.bytes.push_back(cur_.byte);
                        p.mask.push_back(0xFF);
                    } else if (cur_.kind == Token::Kind::HexWild) {
                        p.bytes.push_back(0);
                        p.mask.push_back(0);
                    } else if (cur_.kind == Token::Kind::Punct && cur_.text[0] == '}') {
                        lex_.hex_mode = false;
                        advance();
                        break;
                    } else {
                        throw RuleParseError(cur_.line, "malformed hex string");
                    }
                    advance();
                }
                if (p.bytes.empty()) throw RuleParseError(cur_.line, "empty hex string");
            } else {
                throw RuleParseError(cur_.line, "expected string literal or hex string");
            }
            if (p.kind != Pattern::Kind::Hex && p.text.empty())
                throw RuleParseError(cur_.line, "empty text string");
            rule.strings.push_back(std::move(p));
        }
    }

    static bool is_modifier(const std::string& word) {
        static const std::set<std::string> mods = {"nocase", "wide", "ascii", "fullword",
                                                   "xor", "base64", "base64wide", "private"};
        return mods.count(word) != 0;
    }

    std::unique_ptr<CondNode> parse_expr(const Rule& rule) { return parse_or(rule); }

    std::unique_ptr<CondNode> parse_or(const Rule& rule) {
        auto lhs = parse_and(rule);
        while (at_ident("or")) {
            advance();
            auto node = std::make_unique<CondNode>();
            node->kind = CondNode::Kind::Or;
            node->lhs = std::move(lhs);
            node->rhs = parse_and(rule);
            lhs = std::move(node);
        }
        return lhs;
    }

    std::unique_ptr<CondNode> parse_and(const Rule& rule) {
        auto lhs = parse_unary(rule);
        while (at_ident("and")) {
            advance();
            auto node = std::make_unique<CondNode>();
            node->kind = CondNode::Kind::And;
            node->lhs = std::move(lhs);
            node->rhs = parse_unary(rule);
            lhs = std::move(node);
        }
        return lhs;
    }

    std::unique_ptr<CondNode> parse_unary(const Rule& rule) {
        if (at_ident("not")) {
            advance();
            auto node = std::make_unique<CondNode>();
            node->kind = CondNode::Kind::Not;
            node->lhs = parse_unary(rule);
            return node;
        }
        return parse_primary(rule);
    }

    std::unique_ptr<CondNode> parse_primary(const Rule& rule) {
        auto node = std::make_unique<CondNode>();
        if (cur_.kind == Token::Kind::Punct && cur_.text[0] == '(') {
            advance();
            node = parse_expr(rule);
            expect_punct(')');
            maybe_reject_offset_suffix();
            return node;
        }
        if (at_ident("any") || at_ident("all")) {
            bool any = cur_.text == "any";
            advance();
            if (!at_ident("of")) throw RuleParseError(cur_.line, "expected 'of'");
            advance();
            if (!at_ident("them")) throw UnsupportedConstruct(cur_.line, "of-expression over a pattern set");
            advance();
            node->kind = any ? CondNode::Kind::AnyOfThem : CondNode::Kind::AllOfThem;
            return node;
        }
        if (at_ident("for")) throw UnsupportedConstruct(cur_.line, "for loop");
        if (at_ident("filesize") || at_ident("entrypoint"))
            throw UnsupportedConstruct(cur_.line, cur_.text + " expression");
        if (cur_.kind == Token::Kind::PatternId) {
            bool known = std::any_of(rule.strings.begin(), rule.strings.end(),
                                     [&](const Pattern& p) { return p.id == cur_.text; });
            if (!known)
                throw RuleParseError(cur_.line, "condition references unknown pattern " + cur_.text);
            node->kind = CondNode::Kind::PatternRef;
            node->pattern_id = cur_.text;
            advance();
            maybe_reject_offset_suffix();
            return node;
        }
        if (cur_.kind == Token::Kind::Ident)
            throw RuleParseError(cur_.line, "unexpected identifier '" + cur_.text + "' in condition");
        throw RuleParseError(cur_.line, "malformed condition");
    }

    void maybe_reject_offset_suffix() {
        if (at_ident("at")) throw UnsupportedConstruct(cur_.line, "at-offset condition");
        if (at_ident("in")) throw UnsupportedConstruct(cur_.line, "in-range condition");
    }
};

bool eval(const CondNode& node, const std::vector<bool>& matched, const std::vector<Pattern>& patterns) {
    switch (node.kind) {
    case CondNode::Kind::AnyOfThem:
        return std::any_of(matched.begin(), matched.end(), [](bool b) { return b; });
    case CondNode::Kind::AllOfThem:
        return std::all_of(matched.begin(), matched.end(), [](bool b) { return b; });
    case CondNode::Kind::PatternRef:
        for (size_t i = 0; i < patterns.size(); ++i)
            if (patterns[i].id == node.pattern_id) return matched[i];
        return false;
    case CondNode::Kind::And:
        return eval(*node.lhs, matched, patterns) && eval(*node.rhs, matched, patterns);
    case CondNode::Kind::Or:
        return eval(*node.lhs, matched, patterns) || eval(*node.rhs, matched, patterns);
    case CondNode::Kind::Not:
        return !eval(*node.lhs, matched, patterns);
    }
    return false;
}

uint8_t lower(uint8_t c) { return uint8_t(std::tolower(c)); }

// First match offset of a pattern over the window, or nullopt.
std::optional<size_t> first_match(const Pattern& p, ByteSpan bytes) {
    if (p.kind == Pattern::Kind::Hex) {
        size_t m = p.bytes.size();
        if (m == 0 || bytes.size() < m) return std::nullopt;
        for (size_t o = 0; o + m <= bytes.size(); ++o) {
            bool hit = true;
            for (size_t k = 0; k < m; ++k) {
                if ((bytes[o + k] & p.mask[k]) != (p.bytes[k] & p.mask[k])) { hit = false; break; }
            }
            if (hit) return o;
        }
        return std::nullopt;
    }
    size_t m = p.text.size();
    if (m == 0 || bytes.size() < m) return std::nullopt;
    bool nocase = p.kind == Pattern::Kind::TextNoCase;
    for (size_t o = 0; o + m <= bytes.size(); ++o) {
        bool hit = true;
        for (size_t k = 0; k < m; ++k) {
            uint8_t a = bytes[o + k];
            uint8_t b = uint8_t(p.text[k]);
            if (nocase ? lower(a) != lower(b) : a != b) { hit = false; break; }
        }
        if (hit) return o;
    }
    return std::nullopt;
}

} // namespace

RuleSet parse_rules(const std::string& text) {
    Parser parser(text);
    return parser.parse();
}

std::vector<Finding> match_rules(ByteSpan bytes, const RuleSet& rules, uint64_t base_va) {
    std::vector<Finding> findings;
    for (const Rule& rule : rules.rules) {
        std::vector<bool> matched(rule.strings.size(), false);
        size_t anchor = 0;
        bool have_anchor = false;
        for (size_t i = 0; i < rule.strings.size(); ++i) {
            auto off = first_match(rule.strings[i], bytes);
            if (!off) continue;
            matched[i] = true;
            if (!have_anchor || *off < anchor) { anchor = *off; have_anchor = true; }
        }
        if (!rule.condition || !eval(*rule.condition, matched, rule.strings)) continue;
        Finding f;
        f.category = FindingCategory::YaraMatch;
        f.message = "YARA Match: rule " + rule.name;
        f.anchor_index = anchor;
        f.anchor_va = base_va + anchor;
        findings.push_back(std::move(f));
    }
    return findings;
}

std::vector<Finding> match_regex(InsnSpan insns, const std::regex& re) {
    std::vector<Finding> findings;
    for (size_t i = 0; i < insns.size(); ++i) {
        std::string line = hex_va(insns[i].address) + ": " + insns[i].text;
        if (!std::regex_search(line, re)) continue;
        Finding f;
        f.category = FindingCategory::RegexMatch;
        f.message = "Regex Match: " + line;
        f.anchor_index = i;
        f.anchor_va = insns[i].address;
        findings.push_back(std::move(f));
    }
    return findings;
}

std::vector<Finding> match_regex(InsnSpan insns, const std::string& pattern) {
    return match_regex(insns, std::regex(pattern));
}

} // namespace tlscheck
