#include "parser.hpp"

#include <cctype>
#include <map>

namespace phl {

namespace {

enum class Tok {
    Ident,
    Number,
    Forall,
    Exists,
    ProbOp,
    True,
    False,
    Next,
    Ev,
    Alw,
    Until,
    WUntil,
    LParen,
    RParen,
    Dot,
    Colon,
    At,
    Plus,
    Minus,
    Star,
    Bang,
    AndOp,
    OrOp,
    Arrow,
    IffOp,
    Le,
    Lt,
    Ge,
    Gt,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    Rational value;
    int line, col;
};

std::vector<Token> lex(const std::string& text) {
    std::vector<Token> toks;
    int line = 1, col = 1;
    size_t i = 0;
    auto push = [&](Tok k, std::string t, Rational v = Rational(0)) {
        toks.push_back({k, std::move(t), v, line, col});
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            col = 1;
            ++i;
            continue;
        }
        if (isspace(static_cast<unsigned char>(c))) {
            ++col;
            ++i;
            continue;
        }
        int startcol = col;
        auto advance = [&](size_t k) {
            i += k;
            col += static_cast<int>(k);
        };
        if (isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < text.size() && isdigit(static_cast<unsigned char>(text[j]))) ++j;
            long long ipart = std::stoll(text.substr(i, j - i));
            Rational val(ipart);
            if (j < text.size() && text[j] == '.' && j + 1 < text.size() &&
                isdigit(static_cast<unsigned char>(text[j + 1]))) {
                size_t k = j + 1;
                while (k < text.size() && isdigit(static_cast<unsigned char>(text[k]))) ++k;
                std::string frac = text.substr(j + 1, k - j - 1);
                long long den = 1;
                for (size_t d = 0; d < frac.size(); ++d) den *= 10;
                val = Rational(ipart * den + std::stoll(frac), den);
                j = k;
            } else if (j < text.size() && text[j] == '/' && j + 1 < text.size() &&
                       isdigit(static_cast<unsigned char>(text[j + 1]))) {
                size_t k = j + 1;
                while (k < text.size() && isdigit(static_cast<unsigned char>(text[k]))) ++k;
                long long den = std::stoll(text.substr(j + 1, k - j - 1));
                if (den == 0) throw ParseError(line, startcol, "zero denominator");
                val = Rational(ipart, den);
                j = k;
            }
            toks.push_back({Tok::Number, text.substr(i, j - i), val, line, startcol});
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < text.size() &&
                   (isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                ++j;
            std::string w = text.substr(i, j - i);
            Tok k = Tok::Ident;
            if (w == "forall") k = Tok::Forall;
            else if (w == "exists") k = Tok::Exists;
            else if (w == "P") k = Tok::ProbOp;
            else if (w == "true") k = Tok::True;
            else if (w == "false") k = Tok::False;
            else if (w == "X") k = Tok::Next;
            else if (w == "F") k = Tok::Ev;
            else if (w == "G") k = Tok::Alw;
            else if (w == "U") k = Tok::Until;
            else if (w == "W") k = Tok::WUntil;
            toks.push_back({k, w, Rational(0), line, startcol});
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        auto two = [&](const char* s) {
            return i + 1 < text.size() && text[i] == s[0] && text[i + 1] == s[1];
        };
        if (i + 2 < text.size() && text[i] == '<' && text[i + 1] == '-' && text[i + 2] == '>') {
            push(Tok::IffOp, "<->");
            advance(3);
            continue;
        }
        if (two("->")) { push(Tok::Arrow, "->"); advance(2); continue; }
        if (two("/\\")) { push(Tok::AndOp, "/\\"); advance(2); continue; }
        if (two("\\/")) { push(Tok::OrOp, "\\/"); advance(2); continue; }
        if (two("<=")) { push(Tok::Le, "<="); advance(2); continue; }
        if (two(">=")) { push(Tok::Ge, ">="); advance(2); continue; }
        switch (c) {
            case '(': push(Tok::LParen, "("); advance(1); break;
            case ')': push(Tok::RParen, ")"); advance(1); break;
            case '.': push(Tok::Dot, "."); advance(1); break;
            case ':': push(Tok::Colon, ":"); advance(1); break;
            case '@': push(Tok::At, "@"); advance(1); break;
            case '+': push(Tok::Plus, "+"); advance(1); break;
            case '-': push(Tok::Minus, "-"); advance(1); break;
            case '*': push(Tok::Star, "*"); advance(1); break;
            case '!': push(Tok::Bang, "!"); advance(1); break;
            case '<': push(Tok::Lt, "<"); advance(1); break;
            case '>': push(Tok::Gt, ">"); advance(1); break;
            default:
                throw ParseError(line, startcol, std::string("unexpected character '") + c + "'");
        }
    }
    toks.push_back({Tok::End, "", Rational(0), line, col});
    return toks;
}

class Parser {
  public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    PhlPtr parse_phl_root() {
        PhlPtr f = parse_phl();
        expect(Tok::End, "end of input");
        return f;
    }

    LtlPtr parse_ltl_root() {
        LtlPtr f = parse_ltl();
        expect(Tok::End, "end of input");
        return f;
    }

  private:
    std::vector<Token> toks_;
    size_t pos_ = 0;

    const Token& cur() const { return toks_[pos_]; }
    const Token& ahead(size_t k) const {
        return toks_[std::min(pos_ + k, toks_.size() - 1)];
    }
    Token take() { return toks_[pos_++]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool eat(Tok k) {
        if (!at(k)) return false;
        ++pos_;
        return true;
    }
    [[noreturn]] void fail(const std::string& expected) {
        throw ParseError(cur().line, cur().col,
                         "expected " + expected + ", found '" +
                             (cur().kind == Tok::End ? "<eof>" : cur().text) + "'");
    }
    Token expect(Tok k, const std::string& what) {
        if (!at(k)) fail(what);
        return take();
    }

    bool at_quantifier() const { return at(Tok::Forall) || at(Tok::Exists); }

    PhlPtr parse_phl() {
        // scheduler quantifiers: (forall|exists) IDENT "."
        if (at_quantifier() && ahead(1).kind == Tok::Ident && ahead(2).kind == Tok::Dot) {
            bool universal = take().kind == Tok::Forall;
            std::string var = take().text;
            take();  // '.'
            return phl_quant(universal, std::move(var), parse_phl());
        }
        return parse_disj();
    }

    PhlPtr parse_disj() {
        PhlPtr f = parse_conj();
        while (eat(Tok::OrOp)) f = phl_or(f, parse_conj());
        return f;
    }

    PhlPtr parse_conj() {
        PhlPtr f = parse_unit();
        while (eat(Tok::AndOp)) f = phl_and(f, parse_unit());
        return f;
    }

    PhlPtr parse_unit() {
        if (eat(Tok::Bang)) return phl_not(parse_unit());
        if (at(Tok::LParen)) {
            take();
            PhlPtr f = parse_phl();
            expect(Tok::RParen, "')'");
            return f;
        }
        if (at_quantifier() && ahead(1).kind == Tok::Ident && ahead(2).kind == Tok::Colon)
            return parse_hyper();
        return parse_pred();
    }

    PhlPtr parse_hyper() {
        HyperBody body;
        while (at_quantifier() && ahead(1).kind == Tok::Ident && ahead(2).kind == Tok::Colon) {
            PathQuant q;
            q.universal = take().kind == Tok::Forall;
            q.path_var = take().text;
            take();  // ':'
            q.sched_var = expect(Tok::Ident, "scheduler variable").text;
            expect(Tok::Dot, "'.'");
            body.prefix.push_back(std::move(q));
        }
        body.matrix = parse_ltl();
        return phl_hyper(std::move(body));
    }

    PhlPtr parse_pred() {
        ProbPredicate p;
        p.terms.push_back(parse_term(Rational(1)));
        while (at(Tok::Plus) || at(Tok::Minus)) {
            Rational sign = take().kind == Tok::Plus ? Rational(1) : Rational(-1);
            p.terms.push_back(parse_term(sign));
        }
        if (eat(Tok::Le)) p.cmp = Cmp::Le;
        else if (eat(Tok::Lt)) p.cmp = Cmp::Lt;
        else if (eat(Tok::Ge)) p.cmp = Cmp::Ge;
        else if (eat(Tok::Gt)) p.cmp = Cmp::Gt;
        else fail("comparison operator");
        p.bound = expect(Tok::Number, "rational bound").value;
        return phl_pred(std::move(p));
    }

    ProbTerm parse_term(Rational sign) {
        ProbTerm t;
        t.coeff = sign;
        if (at(Tok::Number)) {
            t.coeff = sign * take().value;
            t.explicit_coeff = true;
            expect(Tok::Star, "'*'");
        }
        expect(Tok::ProbOp, "'P'");
        expect(Tok::LParen, "'('");
        t.operand = parse_ltl();
        expect(Tok::RParen, "')'");
        return t;
    }

    // LTL with the usual precedence; U and W are right associative
    LtlPtr parse_ltl() { return parse_iff(); }

    LtlPtr parse_iff() {
        LtlPtr f = parse_imp();
        while (eat(Tok::IffOp)) f = ltl_bin(LtlOp::Iff, f, parse_imp());
        return f;
    }

    LtlPtr parse_imp() {
        LtlPtr f = parse_or();
        if (eat(Tok::Arrow)) return ltl_bin(LtlOp::Imp, f, parse_imp());
        return f;
    }

    LtlPtr parse_or() {
        LtlPtr f = parse_and();
        while (eat(Tok::OrOp)) f = ltl_bin(LtlOp::Or, f, parse_and());
        return f;
    }

    LtlPtr parse_and() {
        LtlPtr f = parse_uw();
        while (eat(Tok::AndOp)) f = ltl_bin(LtlOp::And, f, parse_uw());
        return f;
    }

    LtlPtr parse_uw() {
        LtlPtr f = parse_unary();
        if (at(Tok::Until) || at(Tok::WUntil)) {
            LtlOp op = take().kind == Tok::Until ? LtlOp::Until : LtlOp::WeakUntil;
            return ltl_bin(op, f, parse_uw());
        }
        return f;
    }

    LtlPtr parse_unary() {
        if (eat(Tok::Bang)) return ltl_not(parse_unary());
        if (eat(Tok::Next)) return ltl_un(LtlOp::Next, parse_unary());
        if (eat(Tok::Ev)) return ltl_un(LtlOp::Eventually, parse_unary());
        if (eat(Tok::Alw)) return ltl_un(LtlOp::Always, parse_unary());
        return parse_primary();
    }

    LtlPtr parse_primary() {
        if (eat(Tok::True)) return ltl_true();
        if (eat(Tok::False)) return ltl_false();
        if (at(Tok::LParen)) {
            take();
            LtlPtr f = parse_ltl();
            expect(Tok::RParen, "')'");
            return f;
        }
        if (at(Tok::Ident)) {
            Token base = take();
            expect(Tok::At, "'@'");
            Token var = expect(Tok::Ident, "variable name");
            return ltl_atom(base.text, var.text);
        }
        fail("atom, constant or '('");
    }
};

// -----------------------------------------------------------------------
// scope resolution

LtlPtr resolve_atoms(const LtlPtr& f, const std::map<std::string, int>& env,
                     const char* what, const std::map<std::string, int>* forbidden,
                     const char* forbidden_msg) {
    if (!f) return f;
    if (f->op == LtlOp::Atom) {
        auto it = env.find(f->atom_var);
        if (it == env.end()) {
            if (forbidden && forbidden->count(f->atom_var))
                throw NotWellFormedError("atom " + f->atom_base + "@" + f->atom_var + ": " +
                                         forbidden_msg);
            throw UnboundVariableError("unbound " + std::string(what) + " variable '" +
                                       f->atom_var + "' in atom " + f->atom_base + "@" +
                                       f->atom_var);
        }
        return ltl_atom(f->atom_base, f->atom_var, it->second);
    }
    Ltl n = *f;
    n.lhs = resolve_atoms(f->lhs, env, what, forbidden, forbidden_msg);
    n.rhs = resolve_atoms(f->rhs, env, what, forbidden, forbidden_msg);
    return std::make_shared<const Ltl>(std::move(n));
}

PhlPtr resolve_node(const PhlPtr& f, std::vector<std::string>& sched_env) {
    std::map<std::string, int> sched_map;
    for (size_t i = 0; i < sched_env.size(); ++i) sched_map[sched_env[i]] = static_cast<int>(i);

    switch (f->kind) {
        case PhlKind::SchedQuant: {
            if (sched_map.count(f->var))
                throw NotWellFormedError("scheduler variable '" + f->var + "' rebound");
            sched_env.push_back(f->var);
            PhlPtr sub = resolve_node(f->lhs, sched_env);
            sched_env.pop_back();
            return phl_quant(f->universal, f->var, sub);
        }
        case PhlKind::And:
            return phl_and(resolve_node(f->lhs, sched_env), resolve_node(f->rhs, sched_env));
        case PhlKind::Or:
            return phl_or(resolve_node(f->lhs, sched_env), resolve_node(f->rhs, sched_env));
        case PhlKind::Not:
            return phl_not(resolve_node(f->lhs, sched_env));
        case PhlKind::Hyper: {
            HyperBody body = *f->hyper;
            std::map<std::string, int> path_map;
            for (size_t i = 0; i < body.prefix.size(); ++i) {
                auto& q = body.prefix[i];
                auto it = sched_map.find(q.sched_var);
                if (it == sched_map.end())
                    throw NotWellFormedError("path quantifier for '" + q.path_var +
                                             "' is outside the scope of scheduler variable '" +
                                             q.sched_var + "'");
                q.sched_index = it->second;
                if (path_map.count(q.path_var))
                    throw NotWellFormedError("path variable '" + q.path_var + "' bound twice");
                path_map[q.path_var] = static_cast<int>(i);
            }
            body.matrix = resolve_atoms(body.matrix, path_map, "path", &sched_map,
                                        "scheduler-indexed atoms cannot appear inside a "
                                        "hyper body; use a path variable");
            return phl_hyper(std::move(body));
        }
        case PhlKind::Pred: {
            ProbPredicate p = *f->pred;
            for (auto& t : p.terms)
                t.operand = resolve_atoms(t.operand, sched_map, "scheduler", nullptr, nullptr);
            return phl_pred(std::move(p));
        }
    }
    throw PhlError("resolve: unreachable");
}

} // namespace

PhlFormula resolve(const PhlFormula& f) {
    std::vector<std::string> env;
    return {resolve_node(f.root, env)};
}

PhlFormula parse_phl(const std::string& text) {
    Parser parser(lex(text));
    PhlFormula f{parser.parse_phl_root()};
    return resolve(f);
}

LtlPtr parse_ltl(const std::string& text) {
    Parser parser(lex(text));
    return parser.parse_ltl_root();
}

} // namespace phl
