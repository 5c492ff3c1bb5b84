#include "vnnarena/sexpr.hpp"

#include "vnnarena/errors.hpp"

namespace vnna::sexpr {

namespace {

struct Lexer {
    std::string_view text;
    size_t pos = 0;
    int line = 1;
    int column = 1;

    void advance() {
        if (pos < text.size()) {
            if (text[pos] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
            ++pos;
        }
    }

    void skip_space_and_comments() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == ';') {
                while (pos < text.size() && text[pos] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                return;
            }
        }
    }

    bool eof() {
        skip_space_and_comments();
        return pos >= text.size();
    }

    Node read_node() {
        skip_space_and_comments();
        if (pos >= text.size())
            throw SyntaxError("unexpected end of input", line, column);
        Node n;
        n.line = line;
        n.column = column;
        char c = text[pos];
        if (c == '(') {
            advance();
            while (true) {
                skip_space_and_comments();
                if (pos >= text.size())
                    throw SyntaxError("unbalanced '('", n.line, n.column);
                if (text[pos] == ')') {
                    advance();
                    return n;
                }
                n.children.push_back(read_node());
            }
        }
        if (c == ')') throw SyntaxError("unexpected ')'", line, column);
        n.is_atom = true;
        while (pos < text.size()) {
            char a = text[pos];
            if (a == '(' || a == ')' || a == ';' ||
                std::isspace(static_cast<unsigned char>(a)))
                break;
            n.atom += a;
            advance();
        }
        return n;
    }
};

}  // namespace

std::vector<Node> parse(std::string_view text) {
    Lexer lex{text};
    std::vector<Node> out;
    while (!lex.eof()) out.push_back(lex.read_node());
    return out;
}

}  // namespace vnna::sexpr
