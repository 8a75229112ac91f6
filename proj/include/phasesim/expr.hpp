#pragma once

#include "phasesim/errors.hpp"

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace phasesim::expr {

enum class NodeKind { number, ident, neg, add, sub, mul, div, pow, call };
enum class Func { exp, sin, cos, sqrt, tanh, ln };

const char* func_name(Func f);

struct Node;
using Expr = std::shared_ptr<const Node>;

/// Immutable expression tree over numbers, identifiers, the binary
/// operators + - * / ^, unary negation and the fixed function set
/// {exp, sin, cos, sqrt, tanh, ln}. x, p and t are reserved variable
/// names; any other identifier is a model parameter.
struct Node {
    NodeKind kind;
    double value = 0.0;   // number
    std::string name;     // ident
    Func fn = Func::exp;  // call
    Expr a, b;
};

/// Parse with standard precedence: ^ binds tightest (right-associative),
/// then unary minus, then * /, then + -. Throws ParseError with the byte
/// offset of the failure; unknown function names are parse errors.
Expr parse_expression(std::string_view text);

/// IEEE double evaluation. Unbound identifiers raise ConfigError, domain
/// violations (sqrt of negative, ln of non-positive, division by zero)
/// raise NumericError.
double eval(const Expr& e, const std::map<std::string, double>& bindings);

/// Exact symbolic derivative; literal-only subtrees are folded.
Expr diff(const Expr& e, std::string_view var);

std::string to_string(const Expr& e);
bool references(const Expr& e, std::string_view name);
std::set<std::string> identifiers(const Expr& e);

Expr make_number(double v);

/// Flat evaluation program for batch sampling of an expression over arrays.
/// Inputs are positional; parameters are folded to constants at compile
/// time. Evaluation is tiled over the input length.
class Program {
public:
    static Program compile(const Expr& e, std::span<const std::string> input_names,
                           const std::map<std::string, double>& params);

    /// out[i] = expr(inputs[0][i], inputs[1][i], ...). No domain checks:
    /// invalid operations produce NaN/Inf for the caller to detect.
    void run(std::span<const double* const> inputs, double* out, std::size_t n) const;

    double run1(std::span<const double> in) const;

    std::size_t input_count() const { return ninputs_; }

private:
    enum class Op : unsigned char {
        input, constant, add, sub, mul, div, neg, powi, powg,
        f_exp, f_sin, f_cos, f_sqrt, f_tanh, f_ln
    };
    struct Instr {
        Op op;
        unsigned short dst = 0, a = 0, b = 0;
        int ipow = 0;
        double imm = 0.0;
    };
    std::vector<Instr> code_;
    std::size_t nslots_ = 0;
    std::size_t ninputs_ = 0;
};

/// Separable Hamiltonian H = T(p,t) + U(x,t) with named real parameters.
struct HamiltonianModel {
    Expr T, U;
    std::map<std::string, double> params;
    std::string T_text, U_text;

    static HamiltonianModel from_strings(const std::string& T_text,
                                         const std::string& U_text,
                                         std::map<std::string, double> params);

    /// Enforces the separability invariants (T has no x, U has no p) and
    /// that every identifier is either a reserved variable or a bound
    /// parameter. Unknown identifiers are reported here, not at parse.
    void validate() const;

    bool time_dependent() const;
    double eval_T(double p, double t) const;
    double eval_U(double x, double t) const;
    double eval_H(double x, double p, double t) const;
    std::string cache_key() const;
};

} // namespace phasesim::expr
