#include "pags/formula.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "pags/error.hpp"

namespace pags {

namespace fml {

namespace {

FormulaPtr make(FormulaKind kind, std::string name = {}, std::vector<FormulaPtr> children = {},
                std::vector<Rational> weights = {})
{
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->name = std::move(name);
    f->children = std::move(children);
    f->weights = std::move(weights);
    return f;
}

} // namespace

FormulaPtr prop(std::string p) { return make(FormulaKind::Prop, std::move(p)); }
FormulaPtr neg(std::string p) { return make(FormulaKind::NegProp, std::move(p)); }

FormulaPtr conj(std::vector<FormulaPtr> parts)
{
    if (parts.size() == 1)
        return parts.front();
    return make(FormulaKind::And, {}, std::move(parts));
}

FormulaPtr disj(std::vector<FormulaPtr> parts)
{
    if (parts.size() == 1)
        return parts.front();
    return make(FormulaKind::Or, {}, std::move(parts));
}

FormulaPtr top()
{
    static const FormulaPtr t = make(FormulaKind::And);
    return t;
}

FormulaPtr bottom()
{
    static const FormulaPtr b = make(FormulaKind::Or);
    return b;
}

FormulaPtr enforce(FormulaPtr body) { return make(FormulaKind::Enforce, {}, {std::move(body)}); }

FormulaPtr sum(std::vector<std::pair<Rational, FormulaPtr>> parts)
{
    if (parts.empty())
        throw PreconditionError("sum needs at least one component");
    Rational total;
    std::vector<FormulaPtr> children;
    std::vector<Rational> weights;
    for (auto& [w, f] : parts) {
        if (w.sign() <= 0)
            throw PreconditionError("sum weight " + w.to_string() + " is not positive");
        total += w;
        weights.push_back(w);
        children.push_back(std::move(f));
    }
    if (total != Rational(1))
        throw PreconditionError("sum weights add up to " + total.to_string() + ", not 1");
    return make(FormulaKind::ProbSum, {}, std::move(children), std::move(weights));
}

FormulaPtr mix(std::vector<FormulaPtr> parts)
{
    if (parts.empty())
        throw PreconditionError("mix needs at least one component");
    return make(FormulaKind::Mix, {}, std::move(parts));
}

FormulaPtr frag(const Rational& alpha, FormulaPtr body)
{
    if (alpha.sign() <= 0 || alpha > Rational(1))
        throw PreconditionError("fragment weight " + alpha.to_string() + " is outside (0,1]");
    if (alpha == Rational(1))
        return sum({{alpha, std::move(body)}});
    return sum({{alpha, std::move(body)}, {Rational(1) - alpha, top()}});
}

FormulaPtr var(std::string name) { return make(FormulaKind::Var, std::move(name)); }
FormulaPtr mu(std::string name, FormulaPtr body) { return make(FormulaKind::Mu, std::move(name), {std::move(body)}); }
FormulaPtr nu(std::string name, FormulaPtr body) { return make(FormulaKind::Nu, std::move(name), {std::move(body)}); }

} // namespace fml

namespace {

bool is_variable_name(std::string_view s)
{
    if (s.empty() || !std::isupper(static_cast<unsigned char>(s.front())))
        return false;
    return std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_keyword(std::string_view s)
{
    return s == "true" || s == "false" || s == "mu" || s == "nu" || s == "sum" || s == "mix" || s == "frag";
}

enum class Tok { Ident, Number, Sym, Modal, End };

struct Token
{
    Tok kind = Tok::End;
    std::string text;
    std::size_t column = 1;
    std::size_t line = 1;
};

std::vector<Token> tokenize(std::string_view text)
{
    std::vector<Token> out;
    std::size_t line = 1;
    std::size_t line_start = 0;
    std::size_t i = 0;
    auto column = [&](std::size_t pos) { return pos - line_start + 1; };
    auto fail = [&](const std::string& msg, std::size_t pos) { throw ParseError(msg, line, column(pos)); };
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
            line_start = ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' || text[i] == '\''))
                ++i;
            out.push_back({Tok::Ident, std::string(text.substr(start, i - start)), column(start), line});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
                ++i;
            if (i + 1 < text.size() && text[i] == '.' && std::isdigit(static_cast<unsigned char>(text[i + 1])))
                fail("decimal literals are not allowed; write a fraction", start);
            out.push_back({Tok::Number, std::string(text.substr(start, i - start)), column(start), line});
            continue;
        }
        if (c == '<') {
            if (text.substr(i, 3) != "<1>")
                fail("expected '<1>'", start);
            i += 3;
            out.push_back({Tok::Modal, "<1>", column(start), line});
            continue;
        }
        if (std::string_view("&|!(){}:,./-").find(c) != std::string_view::npos) {
            ++i;
            out.push_back({Tok::Sym, std::string(1, c), column(start), line});
            continue;
        }
        fail(std::string("unexpected character '") + c + "'", start);
    }
    out.push_back({Tok::End, "", column(i), line});
    return out;
}

class FormulaParser
{
public:
    FormulaParser(std::vector<Token> tokens, bool closed) : _toks(std::move(tokens)), _closed(closed) {}

    FormulaPtr parse_all()
    {
        FormulaPtr f = parse_or();
        if (peek().kind != Tok::End)
            fail("unexpected '" + peek().text + "'");
        return f;
    }

private:
    const Token& peek() const { return _toks[_pos]; }
    Token next() { return _toks[_pos++]; }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().line, peek().column); }

    bool accept_sym(char c)
    {
        if (peek().kind == Tok::Sym && peek().text[0] == c) {
            ++_pos;
            return true;
        }
        return false;
    }

    void expect_sym(char c)
    {
        if (!accept_sym(c))
            fail(std::string("expected '") + c + "'" +
                 (peek().kind == Tok::End ? " at end of input" : ", found '" + peek().text + "'"));
    }

    FormulaPtr parse_or()
    {
        std::vector<FormulaPtr> parts{parse_and()};
        while (accept_sym('|'))
            parts.push_back(parse_and());
        return parts.size() == 1 ? parts.front() : fml::disj(std::move(parts));
    }

    FormulaPtr parse_and()
    {
        std::vector<FormulaPtr> parts{parse_unary()};
        while (accept_sym('&'))
            parts.push_back(parse_unary());
        return parts.size() == 1 ? parts.front() : fml::conj(std::move(parts));
    }

    FormulaPtr parse_unary()
    {
        if (peek().kind == Tok::Modal) {
            next();
            return fml::enforce(parse_unary());
        }
        if (accept_sym('!')) {
            const Token& t = peek();
            if (t.kind != Tok::Ident || is_keyword(t.text) || is_variable_name(t.text))
                fail("negation is only allowed on propositions");
            return fml::neg(next().text);
        }
        return parse_primary();
    }

    Rational parse_rational()
    {
        const Token at = peek();
        bool negative = accept_sym('-');
        if (peek().kind != Tok::Number)
            fail("expected a rational weight");
        std::string text = next().text;
        if (accept_sym('/')) {
            if (peek().kind != Tok::Number)
                fail("expected a denominator");
            text += "/" + next().text;
        }
        try {
            Rational r = Rational::parse(text);
            return negative ? -r : r;
        } catch (const Error& e) {
            throw ParseError(e.what(), at.line, at.column);
        }
    }

    std::string parse_binder_name()
    {
        const Token& t = peek();
        if (t.kind != Tok::Ident || !is_variable_name(t.text))
            fail("expected a variable (uppercase letter, optional digits)");
        return next().text;
    }

    FormulaPtr parse_binder(bool least)
    {
        std::string name = parse_binder_name();
        expect_sym('.');
        _scope.push_back(name);
        FormulaPtr body = parse_or();
        _scope.pop_back();
        return least ? fml::mu(std::move(name), std::move(body)) : fml::nu(std::move(name), std::move(body));
    }

    template <typename Fn>
    FormulaPtr with_weights(const Token& at, Fn&& build)
    {
        try {
            return build();
        } catch (const PreconditionError& e) {
            throw ParseError(e.what(), at.line, at.column);
        }
    }

    FormulaPtr parse_primary()
    {
        const Token t = peek();
        if (accept_sym('(')) {
            FormulaPtr f = parse_or();
            expect_sym(')');
            return f;
        }
        if (t.kind != Tok::Ident)
            fail(t.kind == Tok::End ? "unexpected end of formula" : "unexpected '" + t.text + "'");
        next();
        if (t.text == "true")
            return fml::top();
        if (t.text == "false")
            return fml::bottom();
        if (t.text == "mu" || t.text == "nu")
            return parse_binder(t.text == "mu");
        if (t.text == "sum") {
            expect_sym('{');
            std::vector<std::pair<Rational, FormulaPtr>> parts;
            do {
                Rational w = parse_rational();
                expect_sym(':');
                parts.emplace_back(std::move(w), parse_or());
            } while (accept_sym(','));
            expect_sym('}');
            return with_weights(t, [&] { return fml::sum(std::move(parts)); });
        }
        if (t.text == "mix") {
            expect_sym('{');
            std::vector<FormulaPtr> parts;
            do
                parts.push_back(parse_or());
            while (accept_sym(','));
            expect_sym('}');
            return fml::mix(std::move(parts));
        }
        if (t.text == "frag") {
            expect_sym('{');
            Rational alpha = parse_rational();
            expect_sym(':');
            FormulaPtr body = parse_or();
            expect_sym('}');
            return with_weights(t, [&] { return fml::frag(alpha, std::move(body)); });
        }
        if (is_variable_name(t.text)) {
            if (_closed && std::find(_scope.begin(), _scope.end(), t.text) == _scope.end())
                throw ParseError("unbound variable " + t.text, t.line, t.column);
            return fml::var(t.text);
        }
        return fml::prop(t.text);
    }

    std::vector<Token> _toks;
    std::size_t _pos = 0;
    bool _closed;
    std::vector<std::string> _scope;
};

enum class Ctx { Open, AndArg, OrArg, Prefix };

bool needs_parens(const Formula& f, Ctx ctx)
{
    const bool binder = f.kind == FormulaKind::Mu || f.kind == FormulaKind::Nu;
    const bool nonempty_and = f.kind == FormulaKind::And && !f.children.empty();
    const bool nonempty_or = f.kind == FormulaKind::Or && !f.children.empty();
    switch (ctx) {
    case Ctx::Open:
        return false;
    case Ctx::AndArg:
        return binder || nonempty_and || nonempty_or;
    case Ctx::OrArg:
        return binder || nonempty_or;
    case Ctx::Prefix:
        return binder || nonempty_and || nonempty_or;
    }
    return false;
}

void print(const Formula& f, Ctx ctx, std::string& out)
{
    if (needs_parens(f, ctx)) {
        out += '(';
        print(f, Ctx::Open, out);
        out += ')';
        return;
    }
    switch (f.kind) {
    case FormulaKind::Prop:
    case FormulaKind::Var:
        out += f.name;
        break;
    case FormulaKind::NegProp:
        out += "!" + f.name;
        break;
    case FormulaKind::And:
    case FormulaKind::Or: {
        const bool is_and = f.kind == FormulaKind::And;
        if (f.children.empty()) {
            out += is_and ? "true" : "false";
            break;
        }
        for (std::size_t i = 0; i < f.children.size(); ++i) {
            if (i)
                out += is_and ? " & " : " | ";
            print(*f.children[i], is_and ? Ctx::AndArg : Ctx::OrArg, out);
        }
        break;
    }
    case FormulaKind::Enforce:
        out += "<1> ";
        print(*f.children.front(), Ctx::Prefix, out);
        break;
    case FormulaKind::ProbSum:
        out += "sum{";
        for (std::size_t i = 0; i < f.children.size(); ++i) {
            if (i)
                out += ", ";
            out += f.weights[i].to_string() + ": ";
            print(*f.children[i], Ctx::Open, out);
        }
        out += "}";
        break;
    case FormulaKind::Mix:
        out += "mix{";
        for (std::size_t i = 0; i < f.children.size(); ++i) {
            if (i)
                out += ", ";
            print(*f.children[i], Ctx::Open, out);
        }
        out += "}";
        break;
    case FormulaKind::Mu:
    case FormulaKind::Nu:
        out += f.kind == FormulaKind::Mu ? "mu " : "nu ";
        out += f.name + ". ";
        print(*f.children.front(), Ctx::Open, out);
        break;
    }
}

void collect_free(const Formula& f, std::vector<std::string>& bound, std::set<std::string>& out)
{
    if (f.kind == FormulaKind::Var) {
        if (std::find(bound.begin(), bound.end(), f.name) == bound.end())
            out.insert(f.name);
        return;
    }
    const bool binder = f.kind == FormulaKind::Mu || f.kind == FormulaKind::Nu;
    if (binder)
        bound.push_back(f.name);
    for (const auto& c : f.children)
        collect_free(*c, bound, out);
    if (binder)
        bound.pop_back();
}

} // namespace

FormulaPtr parse_formula(std::string_view text, bool closed)
{
    FormulaParser p(tokenize(text), closed);
    return p.parse_all();
}

std::string to_string(const Formula& f)
{
    std::string out;
    print(f, Ctx::Open, out);
    return out;
}

bool structurally_equal(const Formula& a, const Formula& b)
{
    if (&a == &b)
        return true;
    if (a.kind != b.kind || a.name != b.name || a.weights != b.weights || a.children.size() != b.children.size())
        return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!structurally_equal(*a.children[i], *b.children[i]))
            return false;
    return true;
}

std::set<std::string> free_variables(const Formula& f)
{
    std::vector<std::string> bound;
    std::set<std::string> out;
    collect_free(f, bound, out);
    return out;
}

FormulaPtr substitute(const FormulaPtr& f, const std::string& name, const FormulaPtr& replacement)
{
    switch (f->kind) {
    case FormulaKind::Var:
        return f->name == name ? replacement : f;
    case FormulaKind::Prop:
    case FormulaKind::NegProp:
        return f;
    case FormulaKind::Mu:
    case FormulaKind::Nu:
        if (f->name == name)
            return f;
        break;
    default:
        break;
    }
    bool changed = false;
    std::vector<FormulaPtr> children;
    children.reserve(f->children.size());
    for (const auto& c : f->children) {
        children.push_back(substitute(c, name, replacement));
        changed = changed || children.back() != c;
    }
    if (!changed)
        return f;
    auto copy = std::make_shared<Formula>(*f);
    copy->children = std::move(children);
    return copy;
}

FormulaPtr unfold_fixpoint(const FormulaPtr& f, unsigned m)
{
    if (f->kind != FormulaKind::Mu && f->kind != FormulaKind::Nu)
        throw PreconditionError("unfold_fixpoint expects a mu or nu formula");
    FormulaPtr approx = f->kind == FormulaKind::Mu ? fml::bottom() : fml::top();
    for (unsigned i = 0; i < m; ++i)
        approx = substitute(f->children.front(), f->name, approx);
    return approx;
}

bool convex_safe(const Formula& f)
{
    switch (f.kind) {
    case FormulaKind::Prop:
    case FormulaKind::NegProp:
        return true;
    case FormulaKind::And:
    case FormulaKind::ProbSum:
    case FormulaKind::Mix:
        return std::all_of(f.children.begin(), f.children.end(), [](const FormulaPtr& c) { return convex_safe(*c); });
    default:
        return false;
    }
}

unsigned modal_depth(const Formula& f)
{
    unsigned deepest = 0;
    for (const auto& c : f.children)
        deepest = std::max(deepest, modal_depth(*c));
    return deepest + (f.kind == FormulaKind::Enforce ? 1 : 0);
}

} // namespace pags
