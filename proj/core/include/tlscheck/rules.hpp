#pragma once

#include <cstdint>
#include <memory>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlscheck/heuristics.hpp"

namespace tlscheck {

struct Pattern {
    enum class Kind { Text, TextNoCase, Hex };
    std::string id; // "$a"
    Kind kind = Kind::Text;
    std::string text;           // Text / TextNoCase
    std::vector<uint8_t> bytes; // Hex
    std::vector<uint8_t> mask;  // Hex; 0xff = fixed byte, 0x00 = "??"
};

struct CondNode {
    enum class Kind { AnyOfThem, AllOfThem, PatternRef, And, Or, Not };
    Kind kind = Kind::AnyOfThem;
    std::string pattern_id;
    std::unique_ptr<CondNode> lhs;
    std::unique_ptr<CondNode> rhs;
};

struct Rule {
    std::string name;
    std::vector<Pattern> strings;
    std::unique_ptr<CondNode> condition;
};

struct RuleSet {
    std::vector<Rule> rules;
};

class RuleParseError : public std::runtime_error {
public:
    RuleParseError(size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    size_t line() const { return line_; }

private:
    size_t line_;
};

// Grammar feature outside the supported subset (counts, offsets, loops,
// modules, modifiers beyond nocase, ...).
class UnsupportedConstruct : public RuleParseError {
public:
    UnsupportedConstruct(size_t line, const std::string& construct)
        : RuleParseError(line, "unsupported construct: " + construct), construct_(construct) {}
    const std::string& construct() const { return construct_; }

private:
    std::string construct_;
};

// Subset grammar: rule NAME { strings: $id = "text" ["nocase"] | $id = { HH ?? }
// condition: any of them | all of them | boolean expr over $ids }. Comments
// (// and /* */) and meta sections are accepted and ignored.
RuleSet parse_rules(const std::string& text);

// Evaluates every rule over the byte window. Satisfied rules yield one
// YaraMatch finding anchored at the earliest pattern hit (offset 0 when the
// rule matched without any positive pattern hit).
std::vector<Finding> match_rules(ByteSpan bytes, const RuleSet& rules, uint64_t base_va = 0);

// Tests the pattern against each instruction line "0x{addr}: {text}"
// independently; matching lines yield RegexMatch findings.
std::vector<Finding> match_regex(InsnSpan insns, const std::regex& re);
std::vector<Finding> match_regex(InsnSpan insns, const std::string& pattern); // throws std::regex_error

} // namespace tlscheck
