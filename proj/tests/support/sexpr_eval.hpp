#pragma once

// Independent oracle for the DNF-soundness property: evaluates the original
// assert conjunction of a property file on a concrete (x, y) assignment.
// Deliberately shares no code with the production parser: its own tokenizer,
// its own recursive evaluation.

#include <cctype>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace support::sexpr_eval {

struct Tok {
    std::string s;
};

inline std::vector<Tok> lex(std::string_view text) {
    std::vector<Tok> out;
    std::string cur;
    bool comment = false;
    auto flush = [&]() {
        if (!cur.empty()) {
            out.push_back({cur});
            cur.clear();
        }
    };
    for (char c : text) {
        if (c == '\n') comment = false;
        if (comment) continue;
        if (c == ';') {
            flush();
            comment = true;
        } else if (c == '(' || c == ')') {
            flush();
            out.push_back({std::string(1, c)});
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else {
            cur += c;
        }
    }
    flush();
    return out;
}

struct Evaluator {
    std::vector<Tok> toks;
    size_t pos = 0;
    std::span<const double> x;
    std::span<const double> y;

    bool at(const std::string& s) const {
        return pos < toks.size() && toks[pos].s == s;
    }
    std::string next() {
        if (pos >= toks.size()) throw std::runtime_error("eof");
        return toks[pos++].s;
    }
    void expect(const std::string& s) {
        if (next() != s) throw std::runtime_error("expected " + s);
    }

    double term() {
        std::string t = next();
        if (t == "(") {
            std::string op = next();
            std::vector<double> args;
            while (!at(")")) args.push_back(term());
            expect(")");
            if (op == "+") {
                double acc = 0;
                for (double a : args) acc += a;
                return acc;
            }
            if (op == "-") {
                if (args.size() == 1) return -args[0];
                double acc = args[0];
                for (size_t i = 1; i < args.size(); ++i) acc -= args[i];
                return acc;
            }
            if (op == "*") {
                double acc = 1;
                for (double a : args) acc *= a;
                return acc;
            }
            throw std::runtime_error("bad term op " + op);
        }
        if (t.size() > 2 && t[0] == 'X' && t[1] == '_')
            return x[std::stoul(t.substr(2))];
        if (t.size() > 2 && t[0] == 'Y' && t[1] == '_')
            return y[std::stoul(t.substr(2))];
        return std::stod(t);
    }

    bool formula() {
        expect("(");
        std::string op = next();
        if (op == "<=" || op == ">=") {
            double a = term();
            double b = term();
            expect(")");
            return op == "<=" ? a <= b : a >= b;
        }
        if (op == "and" || op == "or") {
            bool acc = op == "and";
            while (!at(")")) {
                bool v = formula();
                acc = op == "and" ? (acc && v) : (acc || v);
            }
            expect(")");
            return acc;
        }
        throw std::runtime_error("bad formula op " + op);
    }
};

// True iff the conjunction of all asserts holds at (x, y).
inline bool satisfies(std::string_view property_text, std::span<const double> x,
                      std::span<const double> y) {
    Evaluator ev;
    ev.toks = lex(property_text);
    ev.x = x;
    ev.y = y;
    bool all = true;
    while (ev.pos < ev.toks.size()) {
        ev.expect("(");
        std::string head = ev.next();
        if (head == "assert") {
            all = ev.formula() && all;
            ev.expect(")");
        } else {
            // skip the rest of this form (declare-const etc.)
            int depth = 1;
            while (depth > 0) {
                std::string t = ev.next();
                if (t == "(") ++depth;
                if (t == ")") --depth;
            }
        }
    }
    return all;
}

}  // namespace support::sexpr_eval
