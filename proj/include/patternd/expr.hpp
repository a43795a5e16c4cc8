#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace patternd {

/// Longest expression text parse_expr accepts, in bytes.
inline constexpr std::size_t kMaxExprBytes = 4096;

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& what)
        : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class EvalError : public std::runtime_error {
public:
    enum class Kind { unbound_variable, division_by_zero, overflow };

    EvalError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Integer bindings visible to the interpreter. Unbound lookups throw.
class Context {
public:
    void set(std::string name, std::int64_t value) { bindings_[std::move(name)] = value; }
    std::optional<std::int64_t> find(std::string_view name) const;
    std::int64_t lookup(std::string_view name) const;
    std::size_t size() const noexcept { return bindings_.size(); }

private:
    std::map<std::string, std::int64_t, std::less<>> bindings_;
};

enum class BinaryOp : char { add = '+', sub = '-', mul = '*', div = '/' };

class Number;
class Variable;
class Binary;

class ExprVisitor {
public:
    virtual ~ExprVisitor() = default;
    virtual void visit(const Number& node) = 0;
    virtual void visit(const Variable& node) = 0;
    virtual void visit(const Binary& node) = 0;
};

class Expr {
public:
    enum class Kind { number, variable, binary };

    virtual ~Expr() = default;
    virtual Kind kind() const noexcept = 0;
    virtual std::int64_t interpret(const Context& ctx) const = 0;
    virtual void accept(ExprVisitor& visitor) const = 0;
};

using ExprPtr = std::shared_ptr<const Expr>;

class Number final : public Expr {
public:
    explicit Number(std::int64_t value) : value_(value) {}
    Kind kind() const noexcept override { return Kind::number; }
    std::int64_t interpret(const Context&) const override { return value_; }
    void accept(ExprVisitor& visitor) const override { visitor.visit(*this); }
    std::int64_t value() const noexcept { return value_; }

private:
    std::int64_t value_;
};

class Variable final : public Expr {
public:
    explicit Variable(std::string name) : name_(std::move(name)) {}
    Kind kind() const noexcept override { return Kind::variable; }
    std::int64_t interpret(const Context& ctx) const override { return ctx.lookup(name_); }
    void accept(ExprVisitor& visitor) const override { visitor.visit(*this); }
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class Binary final : public Expr {
public:
    Binary(BinaryOp op, ExprPtr left, ExprPtr right);
    Kind kind() const noexcept override { return Kind::binary; }
    std::int64_t interpret(const Context& ctx) const override;
    void accept(ExprVisitor& visitor) const override { visitor.visit(*this); }

    BinaryOp op() const noexcept { return op_; }
    const ExprPtr& left() const noexcept { return left_; }
    const ExprPtr& right() const noexcept { return right_; }

private:
    BinaryOp op_;
    ExprPtr left_;
    ExprPtr right_;
};

/// Checked 64-bit arithmetic; division truncates toward zero.
std::int64_t apply_op(BinaryOp op, std::int64_t lhs, std::int64_t rhs);

ExprPtr make_number(std::int64_t value);
ExprPtr make_variable(std::string name);
ExprPtr make_binary(BinaryOp op, ExprPtr left, ExprPtr right);

bool is_identifier(std::string_view text);

using AtomKey = std::variant<std::int64_t, std::string>;

/// Flyweight factory for leaves: one shared node per distinct key.
class AtomPool {
public:
    ExprPtr intern(const AtomKey& key);
    ExprPtr intern_number(std::int64_t value) { return intern(AtomKey(value)); }
    ExprPtr intern_variable(std::string name) { return intern(AtomKey(std::move(name))); }
    std::size_t size() const;

    /// Process-wide pool used by parse_expr when none is given.
    static AtomPool& shared();

private:
    mutable std::mutex mu_;
    std::map<AtomKey, ExprPtr> interned_;
};

ExprPtr parse_expr(std::string_view text, AtomPool& pool);
ExprPtr parse_expr(std::string_view text);

std::int64_t eval_expr(const Expr& expr, const Context& ctx);

bool structurally_equal(const Expr& a, const Expr& b);

// Built-in visitors.

class EvalVisitor final : public ExprVisitor {
public:
    explicit EvalVisitor(const Context& ctx) : ctx_(ctx) {}
    void visit(const Number& node) override;
    void visit(const Variable& node) override;
    void visit(const Binary& node) override;
    std::int64_t result() const noexcept { return result_; }

private:
    const Context& ctx_;
    std::int64_t result_ = 0;
};

/// Fully parenthesized, single spaces around operators: "((5 + 3) - 2)".
class PrintVisitor final : public ExprVisitor {
public:
    void visit(const Number& node) override;
    void visit(const Variable& node) override;
    void visit(const Binary& node) override;
    const std::string& text() const noexcept { return out_; }

private:
    std::string out_;
};

class CountVisitor final : public ExprVisitor {
public:
    void visit(const Number&) override { ++count_; }
    void visit(const Variable&) override { ++count_; }
    void visit(const Binary& node) override;
    std::size_t count() const noexcept { return count_; }

private:
    std::size_t count_ = 0;
};

std::int64_t eval_with_visitor(const Expr& expr, const Context& ctx);
std::string print_expr(const Expr& expr);
std::size_t count_nodes(const Expr& expr);

/// Bidirectional cursor over a snapshot sequence. next() returns the item at
/// the cursor and advances; previous() steps back and returns that item. Both
/// return nullopt at the ends instead of failing.
template <class T>
class Cursor {
public:
    Cursor() = default;
    explicit Cursor(std::vector<T> items) : items_(std::move(items)) {}

    std::optional<T> next() {
        if (index_ >= items_.size()) return std::nullopt;
        return items_[index_++];
    }
    std::optional<T> previous() {
        if (index_ == 0) return std::nullopt;
        return items_[--index_];
    }
    bool has_next() const noexcept { return index_ < items_.size(); }
    bool has_previous() const noexcept { return index_ > 0; }
    std::size_t position() const noexcept { return index_; }
    std::size_t size() const noexcept { return items_.size(); }

private:
    std::vector<T> items_;
    std::size_t index_ = 0;
};

using NodeCursor = Cursor<ExprPtr>;

/// Pre-order traversal.
NodeCursor iter_nodes(const ExprPtr& root);

namespace demo {

class Library {
public:
    void add_book(std::string title) { books_.push_back(std::move(title)); }
    Cursor<std::string> iterator() const { return Cursor<std::string>(books_); }

private:
    std::vector<std::string> books_;
};

class Circle;
class Rectangle;

class ShapeVisitor {
public:
    virtual ~ShapeVisitor() = default;
    virtual std::string visit_circle(const Circle&) = 0;
    virtual std::string visit_rectangle(const Rectangle&) = 0;
};

class Shape {
public:
    virtual ~Shape() = default;
    virtual std::string accept(ShapeVisitor& visitor) const = 0;
};

class Circle final : public Shape {
public:
    std::string accept(ShapeVisitor& visitor) const override { return visitor.visit_circle(*this); }
};

class Rectangle final : public Shape {
public:
    std::string accept(ShapeVisitor& visitor) const override { return visitor.visit_rectangle(*this); }
};

class DrawVisitor final : public ShapeVisitor {
public:
    std::string visit_circle(const Circle&) override { return "Drawing a circle"; }
    std::string visit_rectangle(const Rectangle&) override { return "Drawing a rectangle"; }
};

class ExportVisitor final : public ShapeVisitor {
public:
    std::string visit_circle(const Circle&) override { return "Exporting a circle to SVG"; }
    std::string visit_rectangle(const Rectangle&) override { return "Exporting a rectangle to PNG"; }
};

}  // namespace demo

}  // namespace patternd
