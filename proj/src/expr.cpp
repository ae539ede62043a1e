#include "lcks/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>

namespace lcks {

VariableScope::VariableScope(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i)
        for (std::size_t j = i + 1; j < names_.size(); ++j)
            if (names_[i] == names_[j]) throw Error("duplicate variable name '" + names_[i] + "'");
}

int VariableScope::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return -1;
}

ScopePtr make_scope(std::vector<std::string> names) {
    return std::make_shared<VariableScope>(std::move(names));
}

namespace {

struct Token {
    enum class Type { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };
    Type type = Type::End;
    std::size_t pos = 0;
    double number = 0.0;
    std::string text;
};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return cur_; }
    Token take() {
        Token t = cur_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
        cur_ = Token{};
        cur_.pos = i_;
        if (i_ >= src_.size()) {
            cur_.type = Token::Type::End;
            return;
        }
        char c = src_[i_];
        switch (c) {
            case '+': cur_.type = Token::Type::Plus; ++i_; return;
            case '-': cur_.type = Token::Type::Minus; ++i_; return;
            case '*': cur_.type = Token::Type::Star; ++i_; return;
            case '/': cur_.type = Token::Type::Slash; ++i_; return;
            case '^': cur_.type = Token::Type::Caret; ++i_; return;
            case '(': cur_.type = Token::Type::LParen; ++i_; return;
            case ')': cur_.type = Token::Type::RParen; ++i_; return;
            case ',': cur_.type = Token::Type::Comma; ++i_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
            std::size_t start = i_;
            while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
            if (i_ < src_.size() && src_[i_] == '.') {
                ++i_;
                while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
            }
            if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
                std::size_t mark = i_;
                ++i_;
                if (i_ < src_.size() && (src_[i_] == '+' || src_[i_] == '-')) ++i_;
                if (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
                    while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
                } else {
                    i_ = mark;  // "2e" is "2" followed by identifier "e"
                }
            }
            double v = 0.0;
            auto res = std::from_chars(src_.data() + start, src_.data() + i_, v);
            if (res.ec != std::errc()) throw SyntaxError(start, "number");
            cur_.type = Token::Type::Number;
            cur_.number = v;
            cur_.text.assign(src_.substr(start, i_ - start));
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i_;
            while (i_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
                ++i_;
            cur_.type = Token::Type::Ident;
            cur_.text.assign(src_.substr(start, i_ - start));
            return;
        }
        throw SyntaxError(i_, "a token");
    }

    std::string_view src_;
    std::size_t i_ = 0;
    Token cur_;
};

const std::map<std::string, std::pair<FuncOp, int>>& function_table() {
    static const std::map<std::string, std::pair<FuncOp, int>> table = {
        {"sin", {FuncOp::Sin, 1}},   {"cos", {FuncOp::Cos, 1}}, {"exp", {FuncOp::Exp, 1}},
        {"ln", {FuncOp::Ln, 1}},     {"sqrt", {FuncOp::Sqrt, 1}}, {"atan2", {FuncOp::Atan2, 2}},
        {"abs", {FuncOp::Abs, 1}},
    };
    return table;
}

NodePtr make_number(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Number;
    n->number = v;
    return n;
}

class Parser {
  public:
    Parser(std::string_view src, ScopePtr scope) : lex_(src), scope_(std::move(scope)) {}

    NodePtr parse_all() {
        NodePtr e = expr();
        if (lex_.peek().type != Token::Type::End) throw SyntaxError(lex_.peek().pos, "end of input");
        return e;
    }

  private:
    NodePtr expr() {
        NodePtr l = term();
        while (true) {
            auto t = lex_.peek().type;
            if (t != Token::Type::Plus && t != Token::Type::Minus) return l;
            lex_.take();
            NodePtr r = term();
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::Binary;
            n->op = t == Token::Type::Plus ? BinaryOp::Add : BinaryOp::Sub;
            n->lhs = std::move(l);
            n->rhs = std::move(r);
            l = std::move(n);
        }
    }

    NodePtr term() {
        NodePtr l = unary();
        while (true) {
            auto t = lex_.peek().type;
            if (t != Token::Type::Star && t != Token::Type::Slash) return l;
            lex_.take();
            NodePtr r = unary();
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::Binary;
            n->op = t == Token::Type::Star ? BinaryOp::Mul : BinaryOp::Div;
            n->lhs = std::move(l);
            n->rhs = std::move(r);
            l = std::move(n);
        }
    }

    NodePtr unary() {
        if (lex_.peek().type == Token::Type::Minus) {
            lex_.take();
            bool direct_number = lex_.peek().type == Token::Type::Number;
            NodePtr operand = (lex_.peek().type == Token::Type::Minus) ? unary() : power();
            // fold "-3" into a negative literal so printing round-trips,
            // but keep -x^2 == -(x^2)
            if (direct_number && operand->kind == ExprNode::Kind::Number)
                return make_number(-operand->number);
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::Negate;
            n->lhs = std::move(operand);
            return n;
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        if (lex_.peek().type != Token::Type::Caret) return base;
        lex_.take();
        double sign = 1.0;
        if (lex_.peek().type == Token::Type::Minus) {
            lex_.take();
            sign = -1.0;
        }
        if (lex_.peek().type != Token::Type::Number)
            throw SyntaxError(lex_.peek().pos, "numeric literal exponent");
        Token t = lex_.take();
        if (lex_.peek().type == Token::Type::Caret)
            throw SyntaxError(lex_.peek().pos, "numeric literal exponent (no chained '^')");
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprNode::Kind::Binary;
        n->op = BinaryOp::Pow;
        n->lhs = std::move(base);
        n->rhs = make_number(sign * t.number);
        return n;
    }

    NodePtr atom() {
        Token t = lex_.peek();
        switch (t.type) {
            case Token::Type::Number:
                lex_.take();
                return make_number(t.number);
            case Token::Type::LParen: {
                lex_.take();
                NodePtr e = expr();
                if (lex_.peek().type != Token::Type::RParen) throw SyntaxError(lex_.peek().pos, "')'");
                lex_.take();
                return e;
            }
            case Token::Type::Ident: {
                lex_.take();
                if (lex_.peek().type == Token::Type::LParen) {
                    auto it = function_table().find(t.text);
                    if (it == function_table().end()) throw UnknownFunction(t.text);
                    lex_.take();
                    std::vector<NodePtr> args;
                    args.push_back(expr());
                    while (lex_.peek().type == Token::Type::Comma) {
                        lex_.take();
                        args.push_back(expr());
                    }
                    if (lex_.peek().type != Token::Type::RParen)
                        throw SyntaxError(lex_.peek().pos, "')'");
                    lex_.take();
                    if (static_cast<int>(args.size()) != it->second.second)
                        throw SyntaxError(t.pos, std::to_string(it->second.second) +
                                                     " argument(s) to '" + t.text + "'");
                    auto n = std::make_shared<ExprNode>();
                    n->kind = ExprNode::Kind::Call;
                    n->func = it->second.first;
                    n->args = std::move(args);
                    return n;
                }
                int idx = scope_->index_of(t.text);
                if (idx < 0) throw UnknownVariable(t.text);
                auto n = std::make_shared<ExprNode>();
                n->kind = ExprNode::Kind::Variable;
                n->var = idx;
                return n;
            }
            default:
                throw SyntaxError(t.pos, "a number, variable, function call or '('");
        }
    }

    Lexer lex_;
    ScopePtr scope_;
};

std::string format_number(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) break;
    }
    return buf;
}

int precedence(const ExprNode& n) {
    switch (n.kind) {
        case ExprNode::Kind::Binary:
            switch (n.op) {
                case BinaryOp::Add:
                case BinaryOp::Sub: return 1;
                case BinaryOp::Mul:
                case BinaryOp::Div: return 2;
                case BinaryOp::Pow: return 4;
            }
            return 1;
        case ExprNode::Kind::Negate:
            return 3;
        case ExprNode::Kind::Number:
            return n.number < 0.0 ? 3 : 5;
        default:
            return 5;
    }
}

const char* op_symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Pow: return "^";
    }
    return "?";
}

const char* func_name(FuncOp f) {
    switch (f) {
        case FuncOp::Sin: return "sin";
        case FuncOp::Cos: return "cos";
        case FuncOp::Exp: return "exp";
        case FuncOp::Ln: return "ln";
        case FuncOp::Sqrt: return "sqrt";
        case FuncOp::Atan2: return "atan2";
        case FuncOp::Abs: return "abs";
    }
    return "?";
}

void print_node(const ExprNode& n, const VariableScope* scope, std::string& out, int parent_prec,
                bool right_side) {
    int prec = precedence(n);
    bool parens = prec < parent_prec || (prec == parent_prec && right_side);
    if (parens) out += '(';
    switch (n.kind) {
        case ExprNode::Kind::Number:
            out += format_number(n.number);
            break;
        case ExprNode::Kind::Variable:
            out += scope ? scope->name(static_cast<std::size_t>(n.var))
                         : "#" + std::to_string(n.var);
            break;
        case ExprNode::Kind::Negate:
            out += '-';
            print_node(*n.lhs, scope, out, 3, true);
            break;
        case ExprNode::Kind::Binary:
            if (n.op == BinaryOp::Pow) {
                print_node(*n.lhs, scope, out, 5, false);
                out += '^';
                out += format_number(n.rhs->number);
            } else {
                print_node(*n.lhs, scope, out, prec, false);
                out += op_symbol(n.op);
                print_node(*n.rhs, scope, out, prec, true);
            }
            break;
        case ExprNode::Kind::Call:
            out += func_name(n.func);
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ',';
                print_node(*n.args[i], scope, out, 0, false);
            }
            out += ')';
            break;
    }
    if (parens) out += ')';
}

bool nodes_equal(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ExprNode::Kind::Number:
            return a.number == b.number;
        case ExprNode::Kind::Variable:
            return a.var == b.var;
        case ExprNode::Kind::Negate:
            return nodes_equal(*a.lhs, *b.lhs);
        case ExprNode::Kind::Binary:
            return a.op == b.op && nodes_equal(*a.lhs, *b.lhs) && nodes_equal(*a.rhs, *b.rhs);
        case ExprNode::Kind::Call: {
            if (a.func != b.func || a.args.size() != b.args.size()) return false;
            for (std::size_t i = 0; i < a.args.size(); ++i)
                if (!nodes_equal(*a.args[i], *b.args[i])) return false;
            return true;
        }
    }
    return false;
}

}  // namespace

Expression parse(std::string_view source, ScopePtr scope) {
    if (source.empty()) throw SyntaxError(0, "nonempty expression");
    if (!scope) throw Error("null variable scope");
    Parser p(source, scope);
    return Expression(p.parse_all(), std::move(scope));
}

double evaluate(const Expression& e, std::span<const double> point) { return e.eval<double>(point); }

ValueAndDerivative directional_derivative(const Expression& e, std::span<const double> point,
                                          std::span<const double> direction) {
    if (point.size() != direction.size())
        throw DimensionMismatch(static_cast<int>(point.size()), static_cast<int>(direction.size()));
    std::vector<D1> dz(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) dz[i] = D1(point[i], direction[i]);
    D1 r = e.eval<D1>(dz);
    return {r.a, r.b};
}

std::string to_string(const Expression& e) {
    if (e.empty()) return {};
    std::string out;
    print_node(*e.root(), e.scope().get(), out, 0, false);
    return out;
}

bool structurally_equal(const Expression& a, const Expression& b) {
    if (a.empty() || b.empty()) return a.empty() == b.empty();
    if (a.scope() && b.scope() && a.scope()->names() != b.scope()->names()) return false;
    return nodes_equal(*a.root(), *b.root());
}

}  // namespace lcks
