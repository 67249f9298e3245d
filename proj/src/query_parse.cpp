#include <cctype>
#include <string>
#include <string_view>

#include "gict/error.hpp"
#include "gict/query.hpp"

// Recursive-descent parser for the query mini-language:
//   P(O=1 | do(H=0); adjust=A)       interventional
//   P(O=1 | H=0, A=1)                conditional
//   ATE(O; H: 1 vs 0; adjust=A)      average treatment effect

namespace gict {

namespace {

class Scanner {
public:
    explicit Scanner(std::string_view text) : text_(text) {}

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c)) {
            fail(ErrorKind::Semantic, "query syntax error: expected '" + std::string(1, c) +
                                          "' at position " + std::to_string(pos_) + " in '" +
                                          std::string(text_) + "'");
        }
    }

    bool eat_keyword(std::string_view kw) {
        skip_ws();
        if (text_.substr(pos_, kw.size()) != kw) return false;
        std::size_t end = pos_ + kw.size();
        // Keywords must not run into an identifier tail.
        if (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                                   text_[end] == '_')) {
            return false;
        }
        pos_ = end;
        return true;
    }

    // Level labels and identifiers: any run of characters outside the
    // grammar's delimiters.
    std::string token() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' ||
                c == '|' || c == ';' || c == ',' || c == '=' || c == ':') {
                break;
            }
            ++pos_;
        }
        if (pos_ == start) {
            fail(ErrorKind::Semantic, "query syntax error: expected a name or level at position " +
                                          std::to_string(pos_) + " in '" + std::string(text_) +
                                          "'");
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

std::vector<std::string> parse_adjust_list(Scanner& sc) {
    std::vector<std::string> vars;
    if (!sc.eat_keyword("adjust")) {
        fail(ErrorKind::Semantic, "query syntax error: expected 'adjust='");
    }
    sc.expect('=');
    vars.push_back(sc.token());
    while (sc.eat(',')) vars.push_back(sc.token());
    return vars;
}

QuerySpec parse_p_query(Scanner& sc) {
    QuerySpec q;
    sc.expect('(');
    q.outcome_var = sc.token();
    sc.expect('=');
    q.outcome_level = sc.token();
    sc.expect('|');

    if (sc.eat_keyword("do")) {
        q.kind = QueryKind::Interventional;
        sc.expect('(');
        q.treatment_var = sc.token();
        sc.expect('=');
        q.treatment_level = sc.token();
        sc.expect(')');
        if (sc.eat(';')) q.adjustment = parse_adjust_list(sc);
    } else {
        q.kind = QueryKind::Conditional;
        do {
            std::string var = sc.token();
            sc.expect('=');
            std::string level = sc.token();
            q.conditions.emplace_back(std::move(var), std::move(level));
        } while (sc.eat(','));
    }
    sc.expect(')');
    return q;
}

QuerySpec parse_ate_query(Scanner& sc) {
    QuerySpec q;
    q.kind = QueryKind::Ate;
    sc.expect('(');
    q.outcome_var = sc.token();
    sc.expect(';');
    q.treatment_var = sc.token();
    sc.expect(':');
    q.treatment_hi = sc.token();
    if (!sc.eat_keyword("vs")) {
        fail(ErrorKind::Semantic, "query syntax error: expected 'vs' between treatment levels");
    }
    q.treatment_lo = sc.token();
    if (sc.eat(';')) q.adjustment = parse_adjust_list(sc);
    sc.expect(')');
    return q;
}

}  // namespace

QuerySpec parse_query(std::string_view text) {
    Scanner sc(text);
    QuerySpec q;
    if (sc.eat_keyword("ATE")) {
        q = parse_ate_query(sc);
    } else if (sc.eat_keyword("P")) {
        q = parse_p_query(sc);
    } else {
        fail(ErrorKind::Semantic, "query must start with P(...) or ATE(...): '" +
                                      std::string(text) + "'");
    }
    if (!sc.at_end()) {
        fail(ErrorKind::Semantic, "trailing characters after query: '" + std::string(text) + "'");
    }
    if (q.kind == QueryKind::Ate && q.treatment_hi == q.treatment_lo) {
        fail(ErrorKind::Semantic, "ATE treatment levels must differ");
    }
    return q;
}

}  // namespace gict
