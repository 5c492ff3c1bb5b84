#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vnna::sexpr {

// Minimal s-expression reader shared by the property and witness parsers.
// Atoms are bare tokens; ';' starts a comment running to end of line.
struct Node {
    bool is_atom = false;
    std::string atom;
    std::vector<Node> children;
    int line = 0;
    int column = 0;

    const Node& child(size_t i) const { return children[i]; }
    size_t size() const { return children.size(); }
};

// Parses all top-level forms. Throws vnna::SyntaxError with location on
// unbalanced parentheses or stray input.
std::vector<Node> parse(std::string_view text);

}  // namespace vnna::sexpr
