#include "splanner/text/parse.hpp"

#include <cctype>
#include <unordered_set>

namespace splanner::text {

namespace {

using efsm::ModelDocument;
using efsm::RawAction;
using efsm::RawApp;
using efsm::RawAssign;
using efsm::RawAtom;
using efsm::RawFunction;
using efsm::RawTransition;
using efsm::RawVar;

enum class Tok {
    Ident,
    String,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Colon,
    Comma,
    Star,
    Arrow,   // ->
    EqEq,    // ==
    Neq,     // !=
    Eq,      // =
    End,
    Invalid,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;   // identifier name or unescaped string contents
    std::string raw;    // the source lexeme, for error messages
    SourceSpan span;
};

const char* describe(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::String: return "string";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Colon: return "':'";
        case Tok::Comma: return "','";
        case Tok::Star: return "'*'";
        case Tok::Arrow: return "'->'";
        case Tok::EqEq: return "'=='";
        case Tok::Neq: return "'!='";
        case Tok::Eq: return "'='";
        case Tok::End: return "end of input";
        case Tok::Invalid: return "invalid token";
    }
    return "?";
}

class Lexer {
public:
    Lexer(const std::string& text, std::string filename, std::vector<Diagnostic>& diags)
        : text_(text), file_(std::move(filename)), diags_(diags) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            Token t = next();
            bool at_end = t.kind == Tok::End;
            if (t.kind != Tok::Invalid) out.push_back(std::move(t));
            if (at_end) break;
        }
        return out;
    }

private:
    SourceSpan here(int length = 1) const { return SourceSpan{file_, line_, col_, length}; }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    char peek2() const { return pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0'; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_trivia() {
        for (;;) {
            char c = peek();
            if (c == '#') {
                while (pos_ < text_.size() && peek() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c)) && c != '\0') {
                advance();
            } else {
                return;
            }
        }
    }

    Token next() {
        skip_trivia();
        if (pos_ >= text_.size()) return Token{Tok::End, "", "", here()};

        SourceSpan span = here();
        char c = peek();

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string ident;
            while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') {
                ident += peek();
                advance();
            }
            span.length = static_cast<int>(ident.size());
            return Token{Tok::Ident, ident, ident, span};
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            // leading digits are allowed inside identifiers like "5s" only
            // after a letter, so bare numeric runs lex as identifiers too;
            // the grammar has no numeric literals.
            std::string ident;
            while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') {
                ident += peek();
                advance();
            }
            span.length = static_cast<int>(ident.size());
            return Token{Tok::Ident, ident, ident, span};
        }
        if (c == '"') return lex_string(span);

        auto single = [&](Tok kind) {
            std::string raw(1, c);
            advance();
            return Token{kind, raw, raw, span};
        };

        switch (c) {
            case '{': return single(Tok::LBrace);
            case '}': return single(Tok::RBrace);
            case '(': return single(Tok::LParen);
            case ')': return single(Tok::RParen);
            case ':': return single(Tok::Colon);
            case ',': return single(Tok::Comma);
            case '*': return single(Tok::Star);
            case '-':
                if (peek2() == '>') {
                    advance();
                    advance();
                    span.length = 2;
                    return Token{Tok::Arrow, "->", "->", span};
                }
                break;
            case '=':
                if (peek2() == '=') {
                    advance();
                    advance();
                    span.length = 2;
                    return Token{Tok::EqEq, "==", "==", span};
                }
                return single(Tok::Eq);
            case '!':
                if (peek2() == '=') {
                    advance();
                    advance();
                    span.length = 2;
                    return Token{Tok::Neq, "!=", "!=", span};
                }
                break;
            default: break;
        }

        diags_.push_back({DiagCode::SYNTAX_ERROR, Severity::Error,
                          std::string("unexpected character '") + c + "'", "", span});
        advance();
        return Token{Tok::Invalid, std::string(1, c), std::string(1, c), span};
    }

    Token lex_string(SourceSpan span) {
        advance();  // opening quote
        std::string value;
        std::string raw = "\"";
        for (;;) {
            if (pos_ >= text_.size() || peek() == '\n') {
                diags_.push_back({DiagCode::SYNTAX_ERROR, Severity::Error,
                                  "unterminated string literal", "", span});
                span.length = static_cast<int>(raw.size());
                return Token{Tok::Invalid, value, raw, span};
            }
            char c = peek();
            raw += c;
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\\') {
                advance();
                char esc = peek();
                raw += esc;
                if (esc == '"' || esc == '\\') {
                    value += esc;
                    advance();
                } else {
                    diags_.push_back({DiagCode::SYNTAX_ERROR, Severity::Error,
                                      std::string("invalid escape '\\") + esc +
                                          "' (only \\\" and \\\\ are recognized)",
                                      "", here()});
                    advance();
                }
                continue;
            }
            value += c;
            advance();
        }
        span.length = static_cast<int>(raw.size());
        return Token{Tok::String, value, raw, span};
    }

    const std::string& text_;
    std::string file_;
    std::vector<Diagnostic>& diags_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// Recursive-descent parser with recovery at section and app boundaries.
class Parser {
public:
    Parser(std::vector<Token> tokens, std::vector<Diagnostic>& diags)
        : toks_(std::move(tokens)), diags_(diags) {}

    ModelDocument run() {
        ModelDocument doc;
        if (at(Tok::End)) {
            error("'app'");
            return doc;
        }
        while (!at(Tok::End)) {
            if (at_keyword("app")) {
                doc.apps.push_back(parse_app());
            } else {
                error("'app'");
                recover_to_keyword("app");
            }
        }
        return doc;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& prev() const { return toks_[pos_ > 0 ? pos_ - 1 : 0]; }

    bool at(Tok kind) const { return cur().kind == kind; }
    bool at_keyword(const char* kw) const { return at(Tok::Ident) && cur().text == kw; }

    Token take() {
        Token t = cur();
        if (!at(Tok::End)) ++pos_;
        return t;
    }

    void error(const std::string& expected) {
        std::string msg = "expected " + expected;
        if (!at(Tok::End)) msg += ", found '" + cur().raw + "'";
        diags_.push_back({DiagCode::SYNTAX_ERROR, Severity::Error, msg, "", cur().span});
    }

    bool expect(Tok kind, const char* what) {
        if (at(kind)) {
            take();
            return true;
        }
        error(what);
        return false;
    }

    std::optional<Token> expect_ident(const char* what) {
        if (at(Tok::Ident)) return take();
        error(what);
        return std::nullopt;
    }

    std::optional<Token> expect_string(const char* what) {
        if (at(Tok::String)) return take();
        error(what);
        return std::nullopt;
    }

    void recover_to_keyword(const char* kw) {
        while (!at(Tok::End) && !at_keyword(kw)) take();
    }

    static bool is_section_keyword(const std::string& s) {
        return s == "vars" || s == "states" || s == "functions" || s == "transitions";
    }

    // Skips to the next section keyword or the app's closing brace. Braces
    // opened along the way are matched so a '}' inside a skipped section does
    // not end the app body.
    void recover_in_app() {
        int depth = 0;
        while (!at(Tok::End)) {
            if (depth == 0 && (at(Tok::RBrace) || (at(Tok::Ident) && is_section_keyword(cur().text))))
                return;
            if (at(Tok::LBrace)) ++depth;
            if (at(Tok::RBrace) && depth > 0) --depth;
            take();
        }
    }

    RawApp parse_app() {
        RawApp app;
        app.span = cur().span;
        take();  // 'app'
        if (auto name = expect_string("application name string")) app.app_id = name->text;
        if (!expect(Tok::LBrace, "'{'")) {
            recover_to_keyword("app");
            return app;
        }

        bool saw_vars = false, saw_states = false, saw_functions = false, saw_transitions = false;
        for (;;) {
            if (at(Tok::RBrace)) {
                take();
                break;
            }
            if (at(Tok::End)) {
                diags_.push_back({DiagCode::UNTERMINATED_BLOCK, Severity::Error,
                                  "app block for '" + app.app_id + "' is never closed",
                                  app.app_id, app.span});
                break;
            }
            if (at_keyword("vars")) {
                if (saw_vars) duplicate_section("vars", app.app_id);
                parse_vars(app, !saw_vars);
                saw_vars = true;
            } else if (at_keyword("states")) {
                if (saw_states) duplicate_section("states", app.app_id);
                parse_states(app, !saw_states);
                saw_states = true;
            } else if (at_keyword("functions")) {
                if (saw_functions) duplicate_section("functions", app.app_id);
                parse_functions(app, !saw_functions);
                saw_functions = true;
            } else if (at_keyword("transitions")) {
                if (saw_transitions) duplicate_section("transitions", app.app_id);
                parse_transitions(app, !saw_transitions);
                saw_transitions = true;
            } else {
                error("'vars', 'states', 'functions', 'transitions' or '}'");
                recover_in_app();
            }
        }
        if (!saw_states) error_at(app.span, "app '" + app.app_id + "' has no states section");
        if (!saw_transitions)
            error_at(app.span, "app '" + app.app_id + "' has no transitions section");
        return app;
    }

    void duplicate_section(const char* name, const std::string& app_id) {
        diags_.push_back({DiagCode::DUPLICATE_SECTION, Severity::Error,
                          std::string("section '") + name + "' appears more than once", app_id,
                          cur().span});
    }

    void error_at(const SourceSpan& span, const std::string& msg) {
        diags_.push_back({DiagCode::SYNTAX_ERROR, Severity::Error, msg, "", span});
    }

    // True when the current token can open a section body brace after the
    // keyword; on failure skips the section.
    bool open_section() {
        take();  // section keyword
        if (!expect(Tok::LBrace, "'{'")) {
            recover_in_app();
            return false;
        }
        return true;
    }

    bool section_end(const char* inside) {
        if (at(Tok::RBrace)) {
            take();
            return true;
        }
        if (at(Tok::End)) {
            diags_.push_back({DiagCode::UNTERMINATED_BLOCK, Severity::Error,
                              std::string(inside) + " block is never closed", "", prev().span});
            return true;
        }
        return false;
    }

    void parse_vars(RawApp& app, bool keep) {
        if (!open_section()) return;
        std::vector<RawVar> vars;
        for (;;) {
            if (section_end("vars")) break;
            if (!at(Tok::Ident)) {
                error("variable name or '}'");
                recover_in_app();
                return;
            }
            RawVar v;
            v.span = cur().span;
            v.name = take().text;
            if (!expect(Tok::Colon, "':'")) {
                recover_in_app();
                return;
            }
            if (at_keyword("bool")) {
                take();
                v.is_bool = true;
            } else if (at_keyword("enum")) {
                take();
                v.is_bool = false;
                if (!expect(Tok::LParen, "'('")) {
                    recover_in_app();
                    return;
                }
                for (;;) {
                    auto lit = expect_ident("enum value");
                    if (!lit) {
                        recover_in_app();
                        return;
                    }
                    v.enum_values.push_back(lit->text);
                    if (at(Tok::Comma)) {
                        take();
                        continue;
                    }
                    break;
                }
                if (v.enum_values.size() < 2) error("at least 2 enum values");
                if (!expect(Tok::RParen, "')'")) {
                    recover_in_app();
                    return;
                }
            } else {
                error("'bool' or 'enum'");
                recover_in_app();
                return;
            }
            if (!expect(Tok::Eq, "'='")) {
                recover_in_app();
                return;
            }
            auto init = parse_literal();
            if (!init) {
                recover_in_app();
                return;
            }
            v.initial = *init;
            vars.push_back(std::move(v));
        }
        if (keep) app.vars = std::move(vars);
    }

    std::optional<std::string> parse_literal() {
        if (at(Tok::Ident)) return take().text;  // covers true/false and enum values
        error("literal");
        return std::nullopt;
    }

    void parse_states(RawApp& app, bool keep) {
        if (!open_section()) return;
        std::vector<std::string> states;
        std::vector<SourceSpan> spans;
        std::vector<std::string> initial;
        for (;;) {
            auto name = expect_ident("state name");
            if (!name) {
                recover_in_app();
                return;
            }
            spans.push_back(name->span);
            states.push_back(name->text);
            if (at(Tok::Star)) {
                take();
                initial.push_back(name->text);
            }
            if (at(Tok::Comma)) {
                take();
                continue;
            }
            break;
        }
        if (!section_end("states")) {
            error("',' or '}'");
            recover_in_app();
            return;
        }
        if (keep) {
            app.states = std::move(states);
            app.state_spans = std::move(spans);
            app.initial_states = std::move(initial);
        }
    }

    void parse_functions(RawApp& app, bool keep) {
        if (!open_section()) return;
        std::vector<RawFunction> fns;
        for (;;) {
            if (section_end("functions")) break;
            if (!at(Tok::Ident)) {
                error("function name or '}'");
                recover_in_app();
                return;
            }
            RawFunction f;
            f.span = cur().span;
            f.name = take().text;
            if (at(Tok::LParen)) {
                take();
                for (;;) {
                    auto p = expect_ident("parameter name");
                    if (!p) {
                        recover_in_app();
                        return;
                    }
                    f.params.push_back(p->text);
                    if (at(Tok::Comma)) {
                        take();
                        continue;
                    }
                    break;
                }
                if (!expect(Tok::RParen, "')'")) {
                    recover_in_app();
                    return;
                }
            }
            if (at(Tok::Colon)) {
                take();
                auto desc = expect_string("description string");
                if (!desc) {
                    recover_in_app();
                    return;
                }
                f.description = desc->text;
            }
            fns.push_back(std::move(f));
        }
        if (keep) app.functions = std::move(fns);
    }

    void parse_transitions(RawApp& app, bool keep) {
        if (!open_section()) return;
        std::vector<RawTransition> trans;
        for (;;) {
            if (section_end("transitions")) break;
            auto t = parse_transition();
            if (!t) {
                recover_in_app();
                if (keep) app.transitions = std::move(trans);
                return;
            }
            trans.push_back(std::move(*t));
        }
        if (keep) app.transitions = std::move(trans);
    }

    std::optional<RawTransition> parse_transition() {
        RawTransition t;
        auto id = expect_ident("transition id");
        if (!id) return std::nullopt;
        t.span = id->span;
        t.id = id->text;
        if (!expect(Tok::Colon, "':'")) return std::nullopt;
        auto src = expect_ident("source state");
        if (!src) return std::nullopt;
        t.source = src->text;
        if (!expect(Tok::Arrow, "'->'")) return std::nullopt;
        auto dst = expect_ident("target state");
        if (!dst) return std::nullopt;
        t.target = dst->text;
        if (!at_keyword("on")) {
            error("'on'");
            return std::nullopt;
        }
        take();
        auto ev = expect_string("event string");
        if (!ev) return std::nullopt;
        t.event_text = ev->text;

        if (at_keyword("when")) {
            take();
            for (;;) {
                auto atom = parse_atom();
                if (!atom) return std::nullopt;
                t.guard.push_back(std::move(*atom));
                if (at_keyword("and")) {
                    take();
                    continue;
                }
                break;
            }
        }
        if (at_keyword("set")) {
            take();
            for (;;) {
                RawAssign a;
                auto var = expect_ident("variable name");
                if (!var) return std::nullopt;
                a.span = var->span;
                a.var = var->text;
                if (!expect(Tok::Eq, "'='")) return std::nullopt;
                auto lit = parse_literal();
                if (!lit) return std::nullopt;
                a.literal = *lit;
                t.update.push_back(std::move(a));
                if (at(Tok::Comma)) {
                    take();
                    continue;
                }
                break;
            }
        }
        if (at_keyword("does")) {
            take();
            RawAction a;
            auto fn = expect_ident("function name");
            if (!fn) return std::nullopt;
            a.span = fn->span;
            a.function = fn->text;
            if (at(Tok::LParen)) {
                take();
                a.has_slot_list = true;
                if (!at(Tok::RParen)) {
                    for (;;) {
                        auto s = expect_ident("slot name");
                        if (!s) return std::nullopt;
                        a.slots.push_back(s->text);
                        if (at(Tok::Comma)) {
                            take();
                            continue;
                        }
                        break;
                    }
                }
                if (!expect(Tok::RParen, "')'")) return std::nullopt;
            }
            t.action = std::move(a);
        }
        return t;
    }

    std::optional<RawAtom> parse_atom() {
        RawAtom atom;
        auto var = expect_ident("variable name");
        if (!var) return std::nullopt;
        atom.span = var->span;
        atom.var = var->text;
        if (at(Tok::EqEq)) {
            take();
            atom.equals = true;
        } else if (at(Tok::Neq)) {
            take();
            atom.equals = false;
        } else if (at(Tok::Eq)) {
            diags_.push_back({DiagCode::SYNTAX_ERROR, Severity::Error,
                              "guards compare with '==', not '='; did you mean '=='?", "",
                              cur().span});
            return std::nullopt;
        } else {
            error("'==' or '!='");
            return std::nullopt;
        }
        auto lit = parse_literal();
        if (!lit) return std::nullopt;
        atom.literal = *lit;
        return atom;
    }

    std::vector<Token> toks_;
    std::vector<Diagnostic>& diags_;
    size_t pos_ = 0;
};

}  // namespace

ParseResult parse_model(const std::string& text, const std::string& filename) {
    ParseResult result;
    Lexer lexer(text, filename, result.diagnostics);
    std::vector<Token> tokens = lexer.run();
    Parser parser(std::move(tokens), result.diagnostics);
    efsm::ModelDocument doc = parser.run();
    if (!has_errors(result.diagnostics)) result.document = std::move(doc);
    return result;
}

}  // namespace splanner::text
