#include "phasesim/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace phasesim::expr {

const char* func_name(Func f) {
    switch (f) {
    case Func::exp: return "exp";
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::sqrt: return "sqrt";
    case Func::tanh: return "tanh";
    case Func::ln: return "ln";
    }
    return "?";
}

namespace {

Expr node(Node n) { return std::make_shared<const Node>(std::move(n)); }

bool is_number(const Expr& e, double v) {
    return e->kind == NodeKind::number && e->value == v;
}

} // namespace

Expr make_number(double v) { return node({.kind = NodeKind::number, .value = v}); }

namespace {

Expr make_ident(std::string name) {
    return node({.kind = NodeKind::ident, .name = std::move(name)});
}

Expr make_neg(Expr a) {
    if (a->kind == NodeKind::number) return make_number(-a->value);
    return node({.kind = NodeKind::neg, .a = std::move(a)});
}

Expr make_add(Expr a, Expr b) {
    if (a->kind == NodeKind::number && b->kind == NodeKind::number)
        return make_number(a->value + b->value);
    if (is_number(a, 0.0)) return b;
    if (is_number(b, 0.0)) return a;
    return node({.kind = NodeKind::add, .a = std::move(a), .b = std::move(b)});
}

Expr make_sub(Expr a, Expr b) {
    if (a->kind == NodeKind::number && b->kind == NodeKind::number)
        return make_number(a->value - b->value);
    if (is_number(b, 0.0)) return a;
    if (is_number(a, 0.0)) return make_neg(b);
    return node({.kind = NodeKind::sub, .a = std::move(a), .b = std::move(b)});
}

Expr make_mul(Expr a, Expr b) {
    if (a->kind == NodeKind::number && b->kind == NodeKind::number)
        return make_number(a->value * b->value);
    if (is_number(a, 0.0) || is_number(b, 0.0)) return make_number(0.0);
    if (is_number(a, 1.0)) return b;
    if (is_number(b, 1.0)) return a;
    return node({.kind = NodeKind::mul, .a = std::move(a), .b = std::move(b)});
}

Expr make_div(Expr a, Expr b) {
    if (a->kind == NodeKind::number && b->kind == NodeKind::number && b->value != 0.0)
        return make_number(a->value / b->value);
    if (is_number(b, 1.0)) return a;
    if (is_number(a, 0.0)) return make_number(0.0);
    return node({.kind = NodeKind::div, .a = std::move(a), .b = std::move(b)});
}

Expr make_pow(Expr a, Expr b) {
    if (is_number(b, 1.0)) return a;
    if (is_number(b, 0.0)) return make_number(1.0);
    if (a->kind == NodeKind::number && b->kind == NodeKind::number)
        return make_number(std::pow(a->value, b->value));
    return node({.kind = NodeKind::pow, .a = std::move(a), .b = std::move(b)});
}

Expr make_call(Func f, Expr a) {
    if (a->kind == NodeKind::number) {
        const double v = a->value;
        switch (f) {
        case Func::exp: return make_number(std::exp(v));
        case Func::sin: return make_number(std::sin(v));
        case Func::cos: return make_number(std::cos(v));
        case Func::sqrt:
            if (v >= 0.0) return make_number(std::sqrt(v));
            break;
        case Func::tanh: return make_number(std::tanh(v));
        case Func::ln:
            if (v > 0.0) return make_number(std::log(v));
            break;
        }
    }
    return node({.kind = NodeKind::call, .fn = f, .a = std::move(a)});
}

// --- recursive-descent parser ----------------------------------------------

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
        Expr e = parse_expr();
        skip_ws();
        if (pos_ < text_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (eat('+'))
                e = make_add(e, parse_term());
            else if (eat('-'))
                e = make_sub(e, parse_term());
            else
                return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        for (;;) {
            if (eat('*'))
                e = make_mul(e, parse_factor());
            else if (eat('/'))
                e = make_div(e, parse_factor());
            else
                return e;
        }
    }

    // factor handles unary minus; ^ binds tighter and is right-associative,
    // so -x^2 parses as -(x^2) and 2^-3 is accepted.
    Expr parse_factor() {
        if (eat('-')) return make_neg(parse_factor());
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        if (eat('^')) return make_pow(base, parse_factor());
        return base;
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t ex = pos_ + 1;
            if (ex < text_.size() && (text_[ex] == '+' || text_[ex] == '-')) ++ex;
            if (ex < text_.size() && std::isdigit(static_cast<unsigned char>(text_[ex]))) {
                pos_ = ex;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            }
        }
        const std::string tok(text_.substr(start, pos_ - start));
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size()) throw ParseError("bad number '" + tok + "'", start);
        return make_number(v);
    }

    Expr parse_ident() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (peek() == '(') {
            Func f;
            if (name == "exp") f = Func::exp;
            else if (name == "sin") f = Func::sin;
            else if (name == "cos") f = Func::cos;
            else if (name == "sqrt") f = Func::sqrt;
            else if (name == "tanh") f = Func::tanh;
            else if (name == "ln") f = Func::ln;
            else throw ParseError("unknown function '" + name + "'", start);
            eat('(');
            Expr arg = parse_expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return make_call(f, arg);
        }
        return make_ident(std::move(name));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace

Expr parse_expression(std::string_view text) { return Parser(text).parse(); }

double eval(const Expr& e, const std::map<std::string, double>& bindings) {
    switch (e->kind) {
    case NodeKind::number: return e->value;
    case NodeKind::ident: {
        auto it = bindings.find(e->name);
        if (it == bindings.end()) throw ConfigError("unbound name '" + e->name + "'");
        return it->second;
    }
    case NodeKind::neg: return -eval(e->a, bindings);
    case NodeKind::add: return eval(e->a, bindings) + eval(e->b, bindings);
    case NodeKind::sub: return eval(e->a, bindings) - eval(e->b, bindings);
    case NodeKind::mul: return eval(e->a, bindings) * eval(e->b, bindings);
    case NodeKind::div: {
        const double d = eval(e->b, bindings);
        if (d == 0.0) throw NumericError("division by zero");
        return eval(e->a, bindings) / d;
    }
    case NodeKind::pow: return std::pow(eval(e->a, bindings), eval(e->b, bindings));
    case NodeKind::call: {
        const double v = eval(e->a, bindings);
        switch (e->fn) {
        case Func::exp: return std::exp(v);
        case Func::sin: return std::sin(v);
        case Func::cos: return std::cos(v);
        case Func::sqrt:
            if (v < 0.0) throw NumericError("sqrt of negative value");
            return std::sqrt(v);
        case Func::tanh: return std::tanh(v);
        case Func::ln:
            if (v <= 0.0) throw NumericError("ln of non-positive value");
            return std::log(v);
        }
    }
    }
    throw Error("corrupt expression node");
}

Expr diff(const Expr& e, std::string_view var) {
    switch (e->kind) {
    case NodeKind::number: return make_number(0.0);
    case NodeKind::ident: return make_number(e->name == var ? 1.0 : 0.0);
    case NodeKind::neg: return make_neg(diff(e->a, var));
    case NodeKind::add: return make_add(diff(e->a, var), diff(e->b, var));
    case NodeKind::sub: return make_sub(diff(e->a, var), diff(e->b, var));
    case NodeKind::mul:
        return make_add(make_mul(diff(e->a, var), e->b), make_mul(e->a, diff(e->b, var)));
    case NodeKind::div:
        return make_div(make_sub(make_mul(diff(e->a, var), e->b),
                                 make_mul(e->a, diff(e->b, var))),
                        make_mul(e->b, e->b));
    case NodeKind::pow: {
        if (e->b->kind == NodeKind::number) {
            const double c = e->b->value;
            return make_mul(make_mul(make_number(c), make_pow(e->a, make_number(c - 1.0))),
                            diff(e->a, var));
        }
        // d(a^b) = a^b * (b' ln a + b a'/a)
        return make_mul(make_pow(e->a, e->b),
                        make_add(make_mul(diff(e->b, var), make_call(Func::ln, e->a)),
                                 make_div(make_mul(e->b, diff(e->a, var)), e->a)));
    }
    case NodeKind::call: {
        const Expr da = diff(e->a, var);
        switch (e->fn) {
        case Func::exp: return make_mul(make_call(Func::exp, e->a), da);
        case Func::sin: return make_mul(make_call(Func::cos, e->a), da);
        case Func::cos: return make_neg(make_mul(make_call(Func::sin, e->a), da));
        case Func::sqrt:
            return make_div(da, make_mul(make_number(2.0), make_call(Func::sqrt, e->a)));
        case Func::tanh: {
            const Expr th = make_call(Func::tanh, e->a);
            return make_mul(make_sub(make_number(1.0), make_mul(th, th)), da);
        }
        case Func::ln: return make_div(da, e->a);
        }
    }
    }
    throw Error("corrupt expression node");
}

namespace {

int precedence(NodeKind k) {
    switch (k) {
    case NodeKind::add:
    case NodeKind::sub: return 1;
    case NodeKind::mul:
    case NodeKind::div: return 2;
    case NodeKind::neg: return 3;
    case NodeKind::pow: return 4;
    default: return 5;
    }
}

void print(std::ostringstream& os, const Expr& e, int parent_prec) {
    const int prec = precedence(e->kind);
    const bool parens = prec < parent_prec;
    if (parens) os << '(';
    switch (e->kind) {
    case NodeKind::number: {
        std::ostringstream tmp;
        tmp.precision(17);
        tmp << e->value;
        os << tmp.str();
        break;
    }
    case NodeKind::ident: os << e->name; break;
    case NodeKind::neg:
        os << '-';
        print(os, e->a, precedence(NodeKind::neg) + 1);
        break;
    case NodeKind::add:
        print(os, e->a, prec);
        os << " + ";
        print(os, e->b, prec + 1);
        break;
    case NodeKind::sub:
        print(os, e->a, prec);
        os << " - ";
        print(os, e->b, prec + 1);
        break;
    case NodeKind::mul:
        print(os, e->a, prec);
        os << "*";
        print(os, e->b, prec + 1);
        break;
    case NodeKind::div:
        print(os, e->a, prec);
        os << "/";
        print(os, e->b, prec + 1);
        break;
    case NodeKind::pow:
        print(os, e->a, prec + 1);
        os << "^";
        print(os, e->b, prec);
        break;
    case NodeKind::call:
        os << func_name(e->fn) << '(';
        print(os, e->a, 0);
        os << ')';
        break;
    }
    if (parens) os << ')';
}

} // namespace

std::string to_string(const Expr& e) {
    std::ostringstream os;
    print(os, e, 0);
    return os.str();
}

bool references(const Expr& e, std::string_view name) {
    switch (e->kind) {
    case NodeKind::number: return false;
    case NodeKind::ident: return e->name == name;
    case NodeKind::neg:
    case NodeKind::call: return references(e->a, name);
    default: return references(e->a, name) || references(e->b, name);
    }
}

namespace {
void collect(const Expr& e, std::set<std::string>& out) {
    switch (e->kind) {
    case NodeKind::number: return;
    case NodeKind::ident: out.insert(e->name); return;
    case NodeKind::neg:
    case NodeKind::call: collect(e->a, out); return;
    default:
        collect(e->a, out);
        collect(e->b, out);
    }
}
} // namespace

std::set<std::string> identifiers(const Expr& e) {
    std::set<std::string> out;
    collect(e, out);
    return out;
}

// --- batch program -----------------------------------------------------------

Program Program::compile(const Expr& e, std::span<const std::string> input_names,
                         const std::map<std::string, double>& params) {
    Program prog;
    prog.ninputs_ = input_names.size();
    unsigned short next = 0;
    auto new_slot = [&]() -> unsigned short { return next++; };

    struct Ctx {
        Program* p;
        std::span<const std::string> inputs;
        const std::map<std::string, double>* params;
    } ctx{&prog, input_names, &params};

    auto emit = [&](auto&& self, const Expr& n) -> unsigned short {
        unsigned short dst = new_slot();
        switch (n->kind) {
        case NodeKind::number:
            ctx.p->code_.push_back({Op::constant, dst, 0, 0, 0, n->value});
            break;
        case NodeKind::ident: {
            bool found = false;
            for (std::size_t i = 0; i < ctx.inputs.size(); ++i)
                if (ctx.inputs[i] == n->name) {
                    ctx.p->code_.push_back({Op::input, dst, (unsigned short)i, 0, 0, 0.0});
                    found = true;
                    break;
                }
            if (!found) {
                auto it = ctx.params->find(n->name);
                if (it == ctx.params->end())
                    throw ConfigError("unbound name '" + n->name + "'");
                ctx.p->code_.push_back({Op::constant, dst, 0, 0, 0, it->second});
            }
            break;
        }
        case NodeKind::neg: {
            unsigned short a = self(self, n->a);
            ctx.p->code_.push_back({Op::neg, dst, a, 0, 0, 0.0});
            break;
        }
        case NodeKind::add:
        case NodeKind::sub:
        case NodeKind::mul:
        case NodeKind::div: {
            unsigned short a = self(self, n->a);
            unsigned short b = self(self, n->b);
            Op op = n->kind == NodeKind::add ? Op::add
                  : n->kind == NodeKind::sub ? Op::sub
                  : n->kind == NodeKind::mul ? Op::mul
                                             : Op::div;
            ctx.p->code_.push_back({op, dst, a, b, 0, 0.0});
            break;
        }
        case NodeKind::pow: {
            unsigned short a = self(self, n->a);
            if (n->b->kind == NodeKind::number) {
                const double c = n->b->value;
                if (c == std::floor(c) && std::abs(c) <= 64.0) {
                    ctx.p->code_.push_back({Op::powi, dst, a, 0, (int)c, 0.0});
                    break;
                }
            }
            unsigned short b = self(self, n->b);
            ctx.p->code_.push_back({Op::powg, dst, a, b, 0, 0.0});
            break;
        }
        case NodeKind::call: {
            unsigned short a = self(self, n->a);
            Op op;
            switch (n->fn) {
            case Func::exp: op = Op::f_exp; break;
            case Func::sin: op = Op::f_sin; break;
            case Func::cos: op = Op::f_cos; break;
            case Func::sqrt: op = Op::f_sqrt; break;
            case Func::tanh: op = Op::f_tanh; break;
            case Func::ln: op = Op::f_ln; break;
            default: throw Error("corrupt expression node");
            }
            ctx.p->code_.push_back({op, dst, a, 0, 0, 0.0});
            break;
        }
        }
        return dst;
    };
    emit(emit, e);
    prog.nslots_ = next;
    if (prog.nslots_ > 60000) throw ConfigError("expression too large to compile");
    return prog;
}

void Program::run(std::span<const double* const> inputs, double* out, std::size_t n) const {
    constexpr std::size_t tile = 1024;
    std::vector<double> regs(nslots_ * tile);
    for (std::size_t base = 0; base < n; base += tile) {
        const std::size_t m = std::min(tile, n - base);
        for (const Instr& ins : code_) {
            double* d = regs.data() + std::size_t(ins.dst) * tile;
            const double* a = regs.data() + std::size_t(ins.a) * tile;
            const double* b = regs.data() + std::size_t(ins.b) * tile;
            switch (ins.op) {
            case Op::input: {
                const double* src = inputs[ins.a] + base;
                for (std::size_t i = 0; i < m; ++i) d[i] = src[i];
                break;
            }
            case Op::constant:
                for (std::size_t i = 0; i < m; ++i) d[i] = ins.imm;
                break;
            case Op::add:
                for (std::size_t i = 0; i < m; ++i) d[i] = a[i] + b[i];
                break;
            case Op::sub:
                for (std::size_t i = 0; i < m; ++i) d[i] = a[i] - b[i];
                break;
            case Op::mul:
                for (std::size_t i = 0; i < m; ++i) d[i] = a[i] * b[i];
                break;
            case Op::div:
                for (std::size_t i = 0; i < m; ++i) d[i] = a[i] / b[i];
                break;
            case Op::neg:
                for (std::size_t i = 0; i < m; ++i) d[i] = -a[i];
                break;
            case Op::powi: {
                const int k = ins.ipow;
                const unsigned uk = (unsigned)(k < 0 ? -k : k);
                for (std::size_t i = 0; i < m; ++i) {
                    double r = 1.0, base_v = a[i];
                    unsigned kk = uk;
                    while (kk) {
                        if (kk & 1) r *= base_v;
                        base_v *= base_v;
                        kk >>= 1;
                    }
                    d[i] = k < 0 ? 1.0 / r : r;
                }
                break;
            }
            case Op::powg:
                for (std::size_t i = 0; i < m; ++i) d[i] = std::pow(a[i], b[i]);
                break;
            case Op::f_exp:
                for (std::size_t i = 0; i < m; ++i) d[i] = std::exp(a[i]);
                break;
            case Op::f_sin:
                for (std::size_t i = 0; i < m; ++i) d[i] = std::sin(a[i]);
                break;
            case Op::f_cos:
                for (std::size_t i = 0; i < m; ++i) d[i] = std::cos(a[i]);
                break;
            case Op::f_sqrt:
                for (std::size_t i = 0; i < m; ++i) d[i] = std::sqrt(a[i]);
                break;
            case Op::f_tanh:
                for (std::size_t i = 0; i < m; ++i) d[i] = std::tanh(a[i]);
                break;
            case Op::f_ln:
                for (std::size_t i = 0; i < m; ++i) d[i] = std::log(a[i]);
                break;
            }
        }
        const double* res = regs.data() + std::size_t(code_.back().dst) * tile;
        for (std::size_t i = 0; i < m; ++i) out[base + i] = res[i];
    }
}

double Program::run1(std::span<const double> in) const {
    std::vector<const double*> ptrs(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) ptrs[i] = &in[i];
    double out;
    run(ptrs, &out, 1);
    return out;
}

// --- model -------------------------------------------------------------------

HamiltonianModel HamiltonianModel::from_strings(const std::string& T_text,
                                                const std::string& U_text,
                                                std::map<std::string, double> params) {
    HamiltonianModel m;
    m.T = parse_expression(T_text);
    m.U = parse_expression(U_text);
    m.params = std::move(params);
    m.T_text = T_text;
    m.U_text = U_text;
    m.validate();
    return m;
}

void HamiltonianModel::validate() const {
    if (!T || !U) throw ConfigError("model missing T or U");
    if (references(T, "x")) throw ConfigError("T must not reference x");
    if (references(U, "p")) throw ConfigError("U must not reference p");
    for (const auto& kv : params)
        if (kv.first == "x" || kv.first == "p" || kv.first == "t")
            throw ConfigError("parameter name '" + kv.first + "' is a reserved variable");
    auto check = [&](const Expr& e, const char* which, const char* allowed_var) {
        for (const auto& id : identifiers(e)) {
            if (id == "t" || id == allowed_var) continue;
            if (id == "x" || id == "p")
                throw ConfigError(std::string(which) + " must not reference " + id);
            if (!params.count(id))
                throw ConfigError(std::string("unknown identifier '") + id + "' in " + which);
        }
    };
    check(T, "T", "p");
    check(U, "U", "x");
}

bool HamiltonianModel::time_dependent() const {
    return references(T, "t") || references(U, "t");
}

double HamiltonianModel::eval_T(double p, double t) const {
    auto b = params;
    b["p"] = p;
    b["t"] = t;
    return eval(T, b);
}

double HamiltonianModel::eval_U(double x, double t) const {
    auto b = params;
    b["x"] = x;
    b["t"] = t;
    return eval(U, b);
}

double HamiltonianModel::eval_H(double x, double p, double t) const {
    return eval_T(p, t) + eval_U(x, t);
}

std::string HamiltonianModel::cache_key() const {
    std::ostringstream os;
    os.precision(17);
    os << "T=" << T_text << ";U=" << U_text;
    for (const auto& kv : params) os << ";" << kv.first << "=" << kv.second;
    return os.str();
}

} // namespace phasesim::expr
