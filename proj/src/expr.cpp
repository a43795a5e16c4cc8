#include "patternd/expr.hpp"

#include <charconv>
#include <limits>

namespace patternd {

std::optional<std::int64_t> Context::find(std::string_view name) const {
    auto it = bindings_.find(name);
    if (it == bindings_.end()) return std::nullopt;
    return it->second;
}

std::int64_t Context::lookup(std::string_view name) const {
    if (auto v = find(name)) return *v;
    throw EvalError(EvalError::Kind::unbound_variable, "unbound variable '" + std::string(name) + "'");
}

Binary::Binary(BinaryOp op, ExprPtr left, ExprPtr right)
    : op_(op), left_(std::move(left)), right_(std::move(right)) {
    if (!left_ || !right_) throw std::invalid_argument("binary node needs two operands");
}

std::int64_t Binary::interpret(const Context& ctx) const {
    return apply_op(op_, left_->interpret(ctx), right_->interpret(ctx));
}

std::int64_t apply_op(BinaryOp op, std::int64_t lhs, std::int64_t rhs) {
    std::int64_t out = 0;
    bool overflow = false;
    switch (op) {
        case BinaryOp::add:
            overflow = __builtin_add_overflow(lhs, rhs, &out);
            break;
        case BinaryOp::sub:
            overflow = __builtin_sub_overflow(lhs, rhs, &out);
            break;
        case BinaryOp::mul:
            overflow = __builtin_mul_overflow(lhs, rhs, &out);
            break;
        case BinaryOp::div:
            if (rhs == 0) throw EvalError(EvalError::Kind::division_by_zero, "division by zero");
            if (lhs == std::numeric_limits<std::int64_t>::min() && rhs == -1) {
                overflow = true;
            } else {
                out = lhs / rhs;
            }
            break;
    }
    if (overflow) {
        throw EvalError(EvalError::Kind::overflow, std::string("integer overflow in '") +
                                                       static_cast<char>(op) + "'");
    }
    return out;
}

ExprPtr make_number(std::int64_t value) { return std::make_shared<const Number>(value); }

ExprPtr make_variable(std::string name) {
    if (!is_identifier(name)) throw std::invalid_argument("invalid identifier '" + name + "'");
    return std::make_shared<const Variable>(std::move(name));
}

ExprPtr make_binary(BinaryOp op, ExprPtr left, ExprPtr right) {
    return std::make_shared<const Binary>(op, std::move(left), std::move(right));
}

bool is_identifier(std::string_view text) {
    if (text.empty() || text[0] < 'a' || text[0] > 'z') return false;
    for (char c : text) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
        if (!ok) return false;
    }
    return true;
}

// --- AtomPool ---------------------------------------------------------------

ExprPtr AtomPool::intern(const AtomKey& key) {
    std::lock_guard lock(mu_);
    auto it = interned_.find(key);
    if (it != interned_.end()) return it->second;
    ExprPtr leaf = std::holds_alternative<std::int64_t>(key)
                       ? make_number(std::get<std::int64_t>(key))
                       : make_variable(std::get<std::string>(key));
    interned_.emplace(key, leaf);
    return leaf;
}

std::size_t AtomPool::size() const {
    std::lock_guard lock(mu_);
    return interned_.size();
}

AtomPool& AtomPool::shared() {
    static AtomPool pool;
    return pool;
}

// --- Parser -----------------------------------------------------------------

namespace {

class Parser {
public:
    Parser(std::string_view text, AtomPool& pool) : text_(text), pool_(pool) {}

    ExprPtr parse() {
        if (text_.size() > kMaxExprBytes) throw ParseError(kMaxExprBytes, "expression too long");
        auto e = parse_sum();
        skip_ws();
        if (pos_ < text_.size()) throw ParseError(pos_, "unexpected '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

private:
    ExprPtr parse_sum() {
        auto lhs = parse_product();
        for (;;) {
            skip_ws();
            if (!at('+') && !at('-')) return lhs;
            auto op = static_cast<BinaryOp>(text_[pos_++]);
            lhs = make_binary(op, lhs, parse_product());
        }
    }

    ExprPtr parse_product() {
        auto lhs = parse_operand();
        for (;;) {
            skip_ws();
            if (!at('*') && !at('/')) return lhs;
            auto op = static_cast<BinaryOp>(text_[pos_++]);
            lhs = make_binary(op, lhs, parse_operand());
        }
    }

    ExprPtr parse_operand() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError(pos_, "expected operand");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = parse_sum();
            skip_ws();
            if (!at(')')) throw ParseError(pos_, "expected ')'");
            ++pos_;
            return inner;
        }
        if (is_digit(c) || (c == '-' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1]))) {
            return parse_number();
        }
        if (c >= 'a' && c <= 'z') return parse_identifier();
        throw ParseError(pos_, "expected operand");
    }

    ExprPtr parse_number() {
        std::size_t start = pos_;
        if (at('-')) ++pos_;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (ec != std::errc()) throw ParseError(start, "integer literal out of range");
        return pool_.intern_number(value);
    }

    ExprPtr parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if ((c >= 'a' && c <= 'z') || is_digit(c) || c == '_') {
                ++pos_;
            } else {
                break;
            }
        }
        return pool_.intern_variable(std::string(text_.substr(start, pos_ - start)));
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }
    bool at(char c) const { return pos_ < text_.size() && text_[pos_] == c; }
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }

    std::string_view text_;
    AtomPool& pool_;
    std::size_t pos_ = 0;
};

}  // namespace

ExprPtr parse_expr(std::string_view text, AtomPool& pool) { return Parser(text, pool).parse(); }

ExprPtr parse_expr(std::string_view text) { return parse_expr(text, AtomPool::shared()); }

std::int64_t eval_expr(const Expr& expr, const Context& ctx) { return expr.interpret(ctx); }

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Expr::Kind::number:
            return static_cast<const Number&>(a).value() == static_cast<const Number&>(b).value();
        case Expr::Kind::variable:
            return static_cast<const Variable&>(a).name() == static_cast<const Variable&>(b).name();
        case Expr::Kind::binary: {
            auto& x = static_cast<const Binary&>(a);
            auto& y = static_cast<const Binary&>(b);
            return x.op() == y.op() && structurally_equal(*x.left(), *y.left()) &&
                   structurally_equal(*x.right(), *y.right());
        }
    }
    return false;
}

// --- Visitors -----------------------------------------------------------------

void EvalVisitor::visit(const Number& node) { result_ = node.value(); }

void EvalVisitor::visit(const Variable& node) { result_ = ctx_.lookup(node.name()); }

void EvalVisitor::visit(const Binary& node) {
    node.left()->accept(*this);
    auto lhs = result_;
    node.right()->accept(*this);
    result_ = apply_op(node.op(), lhs, result_);
}

void PrintVisitor::visit(const Number& node) { out_ += std::to_string(node.value()); }

void PrintVisitor::visit(const Variable& node) { out_ += node.name(); }

void PrintVisitor::visit(const Binary& node) {
    out_ += '(';
    node.left()->accept(*this);
    out_ += ' ';
    out_ += static_cast<char>(node.op());
    out_ += ' ';
    node.right()->accept(*this);
    out_ += ')';
}

void CountVisitor::visit(const Binary& node) {
    ++count_;
    node.left()->accept(*this);
    node.right()->accept(*this);
}

std::int64_t eval_with_visitor(const Expr& expr, const Context& ctx) {
    EvalVisitor v(ctx);
    expr.accept(v);
    return v.result();
}

std::string print_expr(const Expr& expr) {
    PrintVisitor v;
    expr.accept(v);
    return v.text();
}

std::size_t count_nodes(const Expr& expr) {
    CountVisitor v;
    expr.accept(v);
    return v.count();
}

NodeCursor iter_nodes(const ExprPtr& root) {
    std::vector<ExprPtr> order;
    if (!root) return NodeCursor(std::move(order));
    std::vector<ExprPtr> stack{root};
    while (!stack.empty()) {
        auto node = std::move(stack.back());
        stack.pop_back();
        if (node->kind() == Expr::Kind::binary) {
            auto& b = static_cast<const Binary&>(*node);
            stack.push_back(b.right());
            stack.push_back(b.left());
        }
        order.push_back(std::move(node));
    }
    return NodeCursor(std::move(order));
}

}  // namespace patternd
