#include "pags/model.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "pags/error.hpp"

namespace pags {

StateId GameStructure::add_state(const std::string& name)
{
    auto id = _states.declare(name);
    if (!id)
        throw ModelError("duplicate state '" + name + "'");
    _labels.emplace_back();
    resize_table();
    return *id;
}

PropId GameStructure::add_prop(const std::string& name)
{
    auto id = _props.declare(name);
    if (!id)
        throw ModelError("duplicate proposition '" + name + "'");
    return *id;
}

ActionId GameStructure::add_action(Player who, const std::string& name)
{
    auto& table = who == Player::One ? _acts1 : _acts2;
    if (name == "*" && !table.empty())
        throw ModelError("'*' must be the only action of player " + std::to_string(static_cast<int>(who)));
    if (table.find("*"))
        throw ModelError("'*' must be the only action of player " + std::to_string(static_cast<int>(who)));
    auto id = table.declare(name);
    if (!id)
        throw ModelError("duplicate action '" + name + "' for player " + std::to_string(static_cast<int>(who)));
    resize_table();
    return *id;
}

void GameStructure::add_label(StateId s, PropId p)
{
    auto& ls = _labels.at(s.index);
    auto it = std::lower_bound(ls.begin(), ls.end(), p);
    if (it != ls.end() && *it == p)
        throw ModelError("state '" + _states.name(s) + "' labelled twice with '" + _props.name(p) + "'");
    ls.insert(it, p);
}

bool GameStructure::has_label(StateId s, PropId p) const
{
    const auto& ls = _labels.at(s.index);
    return std::binary_search(ls.begin(), ls.end(), p);
}

std::size_t GameStructure::slot(StateId s, ActionId a1, ActionId a2) const
{
    return (static_cast<std::size_t>(s.index) * _acts1.size() + a1.index) * _acts2.size() + a2.index;
}

void GameStructure::resize_table()
{
    // Dimensions changed: re-lay existing rows. Only happens during construction.
    const std::size_t ns = _states.size();
    const std::size_t n1 = _acts1.size();
    const std::size_t n2 = _acts2.size();
    std::vector<std::optional<Distribution>> next(ns * n1 * n2);
    if (!_table.empty()) {
        const std::size_t old_ns = _table_dims[0], old_n1 = _table_dims[1], old_n2 = _table_dims[2];
        for (std::size_t s = 0; s < old_ns; ++s)
            for (std::size_t a = 0; a < old_n1; ++a)
                for (std::size_t b = 0; b < old_n2; ++b)
                    next[(s * n1 + a) * n2 + b] = std::move(_table[(s * old_n1 + a) * old_n2 + b]);
    }
    _table = std::move(next);
    _table_dims = {ns, n1, n2};
}

void GameStructure::set_row(StateId s, ActionId a1, ActionId a2, Distribution row)
{
    if (s.index >= _states.size() || a1.index >= _acts1.size() || a2.index >= _acts2.size())
        throw ModelError("transition row refers to an undeclared identifier");
    auto& cell = _table[slot(s, a1, a2)];
    if (cell)
        throw ModelError("duplicate transition row (" + _states.name(s) + "," + _acts1.name(a1) + "," +
                         _acts2.name(a2) + ")");
    cell = std::move(row);
}

const std::optional<Distribution>& GameStructure::row(StateId s, ActionId a1, ActionId a2) const
{
    return _table.at(slot(s, a1, a2));
}

bool GameStructure::is_absorbing(StateId s) const
{
    const Distribution self = Distribution::point(s);
    for (std::uint32_t a = 0; a < _acts1.size(); ++a)
        for (std::uint32_t b = 0; b < _acts2.size(); ++b) {
            const auto& r = row(s, ActionId{a}, ActionId{b});
            if (!r || *r != self)
                return false;
        }
    return true;
}

bool GameStructure::ignores_player(StateId s, Player who) const
{
    const std::size_t outer = who == Player::One ? _acts2.size() : _acts1.size();
    const std::size_t inner = who == Player::One ? _acts1.size() : _acts2.size();
    for (std::uint32_t o = 0; o < outer; ++o) {
        const std::optional<Distribution>* first = nullptr;
        for (std::uint32_t i = 0; i < inner; ++i) {
            const auto& r = who == Player::One ? row(s, ActionId{i}, ActionId{o}) : row(s, ActionId{o}, ActionId{i});
            if (!first)
                first = &r;
            else if (r != *first)
                return false;
        }
    }
    return true;
}

bool operator==(const GameStructure& a, const GameStructure& b)
{
    return a._name == b._name && a._states == b._states && a._props == b._props && a._acts1 == b._acts1 &&
           a._acts2 == b._acts2 && a._init == b._init && a._labels == b._labels && a._table == b._table;
}

std::vector<std::string> validate_model(const GameStructure& g)
{
    std::vector<std::string> out;
    if (g.num_states() == 0)
        out.emplace_back("model declares no states");
    if (g.num_actions(Player::One) == 0)
        out.emplace_back("player 1 has no actions");
    if (g.num_actions(Player::Two) == 0)
        out.emplace_back("player 2 has no actions");
    if (!g.init())
        out.emplace_back("no initial state");
    else if (g.init()->index >= g.num_states())
        out.emplace_back("initial state is not a declared state");

    for (StateId s : g.states().ids())
        for (PropId p : g.labels(s))
            if (p.index >= g.props().size())
                out.push_back("label of '" + g.states().name(s) + "' uses an undeclared proposition");

    for (StateId s : g.states().ids()) {
        for (ActionId a1 : g.actions(Player::One).ids()) {
            for (ActionId a2 : g.actions(Player::Two).ids()) {
                const std::string where = "(" + g.states().name(s) + "," + g.actions(Player::One).name(a1) + "," +
                                          g.actions(Player::Two).name(a2) + ")";
                const auto& r = g.row(s, a1, a2);
                if (!r) {
                    out.push_back("transition table not total at " + where);
                    continue;
                }
                bool positive = true;
                for (const auto& [t, p] : r->entries()) {
                    if (t.index >= g.num_states())
                        out.push_back("row " + where + " targets an undeclared state");
                    if (p.sign() <= 0)
                        positive = false;
                }
                if (!positive)
                    out.push_back("row " + where + " has a non-positive entry");
                if (r->empty())
                    out.push_back("row " + where + " is empty");
                else if (r->total_mass() != Rational(1))
                    out.push_back("row " + where + " sums to " + r->total_mass().to_string());
            }
        }
    }
    return out;
}

const Distribution& step_state(const GameStructure& g, StateId s, ActionId a1, ActionId a2)
{
    if (s.index >= g.num_states())
        throw ModelError("unknown state #" + std::to_string(s.index));
    if (a1.index >= g.num_actions(Player::One))
        throw ModelError("unknown player 1 action #" + std::to_string(a1.index));
    if (a2.index >= g.num_actions(Player::Two))
        throw ModelError("unknown player 2 action #" + std::to_string(a2.index));
    const auto& r = g.row(s, a1, a2);
    if (!r)
        throw ModelError("transition table not total at (" + g.states().name(s) + "," +
                         g.actions(Player::One).name(a1) + "," + g.actions(Player::Two).name(a2) + ")");
    return *r;
}

StateId state_named(const GameStructure& g, std::string_view name)
{
    auto id = g.states().find(name);
    if (!id)
        throw ModelError("unknown state '" + std::string(name) + "'");
    return *id;
}

ActionId action_named(const GameStructure& g, Player who, std::string_view name)
{
    auto id = g.actions(who).find(name);
    if (!id)
        throw ModelError("unknown action '" + std::string(name) + "' for player " +
                         std::to_string(static_cast<int>(who)));
    return *id;
}

PropId prop_named(const GameStructure& g, std::string_view name)
{
    auto id = g.props().find(name);
    if (!id)
        throw ModelError("unknown proposition '" + std::string(name) + "'");
    return *id;
}

// ---------------------------------------------------------------------------
// .pgs reader

namespace {

enum class Tok { Ident, Number, Star, Colon, LParen, RParen, Comma, Equals, Slash, End };

struct Token
{
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

bool ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> lex_line(std::string_view line, std::size_t lineno)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        const std::size_t col = i + 1;
        if (c == '#')
            break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < line.size() && (std::isdigit(static_cast<unsigned char>(line[j])) || line[j] == '.'))
                ++j;
            std::string text(line.substr(i, j - i));
            if (text.find('.') != std::string::npos)
                throw ParseError("decimal literal '" + text + "' is not allowed; write a fraction n/d", lineno, col);
            // An identifier may not start with a digit, but `0a` style tokens are still an error.
            if (j < line.size() && ident_char(line[j]))
                throw ParseError("malformed number", lineno, col);
            out.push_back({Tok::Number, std::move(text), lineno, col});
            i = j;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < line.size() && ident_char(line[j]))
                ++j;
            out.push_back({Tok::Ident, std::string(line.substr(i, j - i)), lineno, col});
            i = j;
            continue;
        }
        Tok k;
        switch (c) {
        case '*': k = Tok::Star; break;
        case ':': k = Tok::Colon; break;
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        case ',': k = Tok::Comma; break;
        case '=': k = Tok::Equals; break;
        case '/': k = Tok::Slash; break;
        case '-':
            throw ParseError("negative numbers are not allowed", lineno, col);
        default:
            throw ParseError(std::string("unexpected character '") + c + "'", lineno, col);
        }
        out.push_back({k, std::string(1, c), lineno, col});
        ++i;
    }
    out.push_back({Tok::End, "", lineno, line.size() + 1});
    return out;
}

class LineParser
{
public:
    LineParser(std::vector<Token> toks, GameStructure& g) : _toks(std::move(toks)), _g(g) {}

    void statement()
    {
        if (peek().kind == Tok::End)
            return;
        const Token& head = peek();
        if (head.kind != Tok::Ident)
            fail("expected a statement keyword");
        if (is_section(head.text) && peek(1).kind == Tok::Colon) {
            while (peek().kind != Tok::End)
                section();
            return;
        }
        if (head.text == "model") {
            next();
            _g.set_name(expect(Tok::Ident, "model name").text);
        } else if (head.text == "label") {
            next();
            label();
        } else if (head.text == "trans") {
            next();
            trans();
        } else if (head.text == "absorb") {
            next();
            absorb();
        } else {
            fail("unknown statement '" + head.text + "'");
        }
        expect(Tok::End, "end of line");
    }

    [[nodiscard]] bool saw_init() const { return _saw_init; }

private:
    static bool is_section(const std::string& s)
    {
        return s == "states" || s == "init" || s == "props" || s == "actions1" || s == "actions2";
    }

    const Token& peek(std::size_t ahead = 0) const { return _toks[std::min(_pos + ahead, _toks.size() - 1)]; }
    const Token& next() { return _toks[std::min(_pos++, _toks.size() - 1)]; }

    [[noreturn]] void fail(const std::string& message) const
    {
        throw ParseError(message, peek().line, peek().column);
    }

    [[noreturn]] void semantic(const Token& at, const std::string& message) const
    {
        throw ModelError("line " + std::to_string(at.line) + ": " + message);
    }

    const Token& expect(Tok kind, const std::string& what)
    {
        if (peek().kind != kind)
            fail("expected " + what + (peek().kind == Tok::End ? "" : ", got '" + peek().text + "'"));
        return next();
    }

    bool section_starts_here() const
    {
        return peek().kind == Tok::Ident && is_section(peek().text) && peek(1).kind == Tok::Colon;
    }

    void section()
    {
        const Token key = expect(Tok::Ident, "section keyword");
        expect(Tok::Colon, "':'");
        std::vector<Token> items;
        while (peek().kind != Tok::End && !section_starts_here()) {
            if (peek().kind != Tok::Ident && peek().kind != Tok::Star)
                fail("expected a name");
            items.push_back(next());
        }
        for (const Token& t : items) {
            if (t.kind == Tok::Star && key.text != "actions1" && key.text != "actions2")
                semantic(t, "'*' is only allowed as an action name");
        }
        try {
            if (key.text == "states") {
                if (items.empty())
                    fail("expected at least one state");
                for (const Token& t : items)
                    _g.add_state(t.text);
            } else if (key.text == "init") {
                if (items.size() != 1)
                    semantic(key, "init takes exactly one state");
                _g.set_init(state(items[0]));
                _saw_init = true;
            } else if (key.text == "props") {
                for (const Token& t : items)
                    _g.add_prop(t.text);
            } else {
                const Player who = key.text == "actions1" ? Player::One : Player::Two;
                if (items.empty())
                    semantic(key, "player " + std::to_string(static_cast<int>(who)) + " needs at least one action");
                for (const Token& t : items)
                    _g.add_action(who, t.text);
            }
        } catch (const ModelError& e) {
            if (std::string_view(e.what()).starts_with("line "))
                throw;
            semantic(key, e.what());
        }
    }

    StateId state(const Token& t) const
    {
        auto id = _g.states().find(t.text);
        if (!id)
            semantic(t, "unknown state '" + t.text + "'");
        return *id;
    }

    ActionId action(const Token& t, Player who) const
    {
        auto id = _g.actions(who).find(t.text);
        if (!id)
            semantic(t, "unknown action '" + t.text + "' for player " + std::to_string(static_cast<int>(who)));
        return *id;
    }

    void label()
    {
        const Token& st = expect(Tok::Ident, "state name");
        const StateId s = state(st);
        expect(Tok::Colon, "':'");
        while (peek().kind == Tok::Ident) {
            const Token& pt = next();
            auto p = _g.props().find(pt.text);
            if (!p)
                semantic(pt, "unknown proposition '" + pt.text + "'");
            try {
                _g.add_label(s, *p);
            } catch (const ModelError& e) {
                semantic(pt, e.what());
            }
        }
    }

    Token action_token()
    {
        if (peek().kind != Tok::Ident && peek().kind != Tok::Star)
            fail("expected an action name");
        return next();
    }

    Rational rational()
    {
        const Token& num = expect(Tok::Number, "probability");
        std::string text = num.text;
        if (peek().kind == Tok::Slash) {
            next();
            text += "/" + expect(Tok::Number, "denominator").text;
        }
        try {
            return Rational::parse(text);
        } catch (const Error& e) {
            throw ParseError(e.what(), num.line, num.column);
        }
    }

    void trans()
    {
        const Token st = expect(Tok::Ident, "state name");
        const StateId s = state(st);
        expect(Tok::LParen, "'('");
        const Token t1 = action_token();
        expect(Tok::Comma, "','");
        const Token t2 = action_token();
        expect(Tok::RParen, "')'");
        expect(Tok::Colon, "':'");
        const ActionId a1 = action(t1, Player::One);
        const ActionId a2 = action(t2, Player::Two);
        std::vector<Distribution::Entry> entries;
        if (peek().kind == Tok::End)
            fail("expected at least one target state=probability");
        while (peek().kind != Tok::End) {
            const Token target = expect(Tok::Ident, "target state");
            expect(Tok::Equals, "'='");
            Rational p = rational();
            if (p.is_zero())
                semantic(target, "probability for '" + target.text + "' must be positive");
            const StateId t = state(target);
            for (const auto& e : entries)
                if (e.first == t)
                    semantic(target, "state '" + target.text + "' listed twice in one row");
            entries.emplace_back(t, std::move(p));
        }
        try {
            _g.set_row(s, a1, a2, Distribution::unchecked(std::move(entries)));
        } catch (const ModelError& e) {
            semantic(st, e.what());
        }
    }

    void absorb()
    {
        const Token st = expect(Tok::Ident, "state name");
        const StateId s = state(st);
        if (_g.num_actions(Player::One) == 0 || _g.num_actions(Player::Two) == 0)
            semantic(st, "absorb requires both action sets to be declared first");
        try {
            for (ActionId a1 : _g.actions(Player::One).ids())
                for (ActionId a2 : _g.actions(Player::Two).ids())
                    _g.set_row(s, a1, a2, Distribution::point(s));
        } catch (const ModelError& e) {
            semantic(st, e.what());
        }
    }

    std::vector<Token> _toks;
    std::size_t _pos = 0;
    GameStructure& _g;
    bool _saw_init = false;
};

} // namespace

GameStructure parse_model(std::string_view text)
{
    GameStructure g;
    bool saw_model = false;
    bool saw_init = false;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        ++lineno;
        auto toks = lex_line(line, lineno);
        if (!toks.empty() && toks.front().kind == Tok::Ident && toks.front().text == "model") {
            if (saw_model)
                throw ModelError("line " + std::to_string(lineno) + ": duplicate model declaration");
            saw_model = true;
        }
        LineParser p(std::move(toks), g);
        p.statement();
        if (p.saw_init()) {
            if (saw_init)
                throw ModelError("line " + std::to_string(lineno) + ": duplicate init declaration");
            saw_init = true;
        }
        start = end + 1;
    }
    if (!saw_model)
        throw ParseError("missing 'model <name>' declaration", 1, 1);
    if (!g.init() && g.num_states() > 0)
        g.set_init(StateId{0});
    auto problems = validate_model(g);
    if (!problems.empty()) {
        std::string message = "invalid model:";
        for (const auto& p : problems)
            message += "\n  " + p;
        throw ModelError(message);
    }
    return g;
}

std::string serialize_model(const GameStructure& g)
{
    std::ostringstream os;
    const auto& states = g.states();
    const auto& acts1 = g.actions(Player::One);
    const auto& acts2 = g.actions(Player::Two);
    os << "model " << g.name() << "\n";
    os << "states:";
    for (const auto& n : states.names())
        os << ' ' << n;
    os << "\ninit: " << states.name(g.init().value_or(StateId{0})) << "\n";
    os << "props:";
    for (const auto& n : g.props().names())
        os << ' ' << n;
    os << "\n";
    for (StateId s : states.ids()) {
        if (g.labels(s).empty())
            continue;
        os << "label " << states.name(s) << ":";
        for (PropId p : g.labels(s))
            os << ' ' << g.props().name(p);
        os << "\n";
    }
    os << "actions1:";
    for (const auto& n : acts1.names())
        os << ' ' << n;
    os << "\nactions2:";
    for (const auto& n : acts2.names())
        os << ' ' << n;
    os << "\n";
    for (StateId s : states.ids()) {
        if (g.is_absorbing(s)) {
            os << "absorb " << states.name(s) << "\n";
            continue;
        }
        for (ActionId a1 : acts1.ids()) {
            for (ActionId a2 : acts2.ids()) {
                const auto& r = g.row(s, a1, a2);
                if (!r)
                    continue;
                os << "trans " << states.name(s) << " (" << acts1.name(a1) << "," << acts2.name(a2) << "):";
                for (const auto& [t, p] : r->entries())
                    os << ' ' << states.name(t) << '=' << p;
                os << "\n";
            }
        }
    }
    return os.str();
}

} // namespace pags
