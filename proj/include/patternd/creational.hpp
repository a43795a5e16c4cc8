#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "patternd/logging.hpp"
#include "patternd/messaging.hpp"

namespace patternd {

// ---------------------------------------------------------------------------
// Builder
// ---------------------------------------------------------------------------

struct ServerConfig {
    std::uint16_t port = 7465;
    std::size_t workers = 4;
    std::size_t queue_cap = 64;
    std::string family = "text";
    std::size_t max_conns = 128;
    std::optional<std::string> log_path;

    bool operator==(const ServerConfig&) const = default;
};

class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Fluent builder; nothing is validated until build().
class ConfigBuilder {
public:
    ConfigBuilder& port(std::int64_t value) {
        port_ = value;
        return *this;
    }
    ConfigBuilder& workers(std::int64_t value) {
        workers_ = value;
        return *this;
    }
    ConfigBuilder& queue_cap(std::int64_t value) {
        queue_cap_ = value;
        return *this;
    }
    ConfigBuilder& family(std::string value) {
        family_ = std::move(value);
        return *this;
    }
    ConfigBuilder& max_conns(std::int64_t value) {
        max_conns_ = value;
        return *this;
    }
    ConfigBuilder& log_path(std::string value) {
        log_path_ = std::move(value);
        return *this;
    }

    /// Unset fields take the defaults; throws ConfigError naming the first
    /// out-of-range field.
    ServerConfig build() const;

    bool operator==(const ConfigBuilder&) const = default;

private:
    std::optional<std::int64_t> port_;
    std::optional<std::int64_t> workers_;
    std::optional<std::int64_t> queue_cap_;
    std::optional<std::string> family_;
    std::optional<std::int64_t> max_conns_;
    std::optional<std::string> log_path_;
};

ServerConfig build_config(const ConfigBuilder& builder);

// ---------------------------------------------------------------------------
// Singleton registry
// ---------------------------------------------------------------------------

/// Process-wide registry of configuration, counters and the log sink.
class Registry {
public:
    static Registry& instance();

    /// How many times the constructor has run in this process.
    static std::uint64_t construction_count() noexcept;

    /// Test harness only: destroys the instance so the next instance() call
    /// constructs afresh. Any outstanding references dangle. Never call this
    /// from production code.
    static void reset_for_testing();

    Registry(const Registry&) = delete;
    Registry& operator=(const Registry&) = delete;

    void configure(ServerConfig config);
    ServerConfig config() const;

    void increment(std::string_view name, std::uint64_t delta = 1);
    std::uint64_t counter(std::string_view name) const;
    std::map<std::string, std::uint64_t> counters() const;

    void set_logger(std::shared_ptr<Logger> logger);
    std::shared_ptr<Logger> logger() const;

private:
    Registry();

    mutable std::mutex mu_;
    ServerConfig config_;
    std::map<std::string, std::uint64_t, std::less<>> counters_;
    std::shared_ptr<Logger> logger_;
};

inline Registry& registry_instance() { return Registry::instance(); }

// ---------------------------------------------------------------------------
// Factory method: verb-group handlers
// ---------------------------------------------------------------------------

inline constexpr std::array<std::string_view, 6> kHandlerKinds{"eval",   "doc",    "price",
                                                               "player", "events", "admin"};

class FactoryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Creator: subclasses decide which concrete handler each verb group gets.
class HandlerFactory {
public:
    virtual ~HandlerFactory() = default;

    /// Throws FactoryError listing the registered kinds if `kind` is unknown.
    std::shared_ptr<Handler> create(std::string_view kind) const;

protected:
    virtual std::shared_ptr<Handler> make(std::string_view kind) const = 0;
};

std::shared_ptr<Handler> create_handler(const HandlerFactory& factory, std::string_view kind);

// ---------------------------------------------------------------------------
// Abstract factory: protocol families
// ---------------------------------------------------------------------------

class RequestParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RequestParser {
public:
    virtual ~RequestParser() = default;
    /// Throws RequestParseError on a malformed line.
    virtual Request parse(std::string_view line) const = 0;
    /// Canonical line for a request.
    virtual std::string format(const Request& request) const = 0;
};

class ResponseRenderer {
public:
    virtual ~ResponseRenderer() = default;
    /// One line, no terminator.
    virtual std::string render(const Reply& reply) const = 0;
    /// Inverse of render; throws RequestParseError on lines it did not produce.
    virtual Reply read(std::string_view line) const = 0;
};

class ProtocolFamilyFactory {
public:
    virtual ~ProtocolFamilyFactory() = default;
    virtual std::string name() const = 0;
    virtual std::shared_ptr<const RequestParser> create_parser() const = 0;
    virtual std::shared_ptr<const ResponseRenderer> create_renderer() const = 0;
};

/// Matched parser/renderer pair. Only create_protocol_family builds one, so
/// members of different families cannot be mixed.
class ProtocolFamily {
public:
    const std::string& name() const noexcept { return name_; }
    const RequestParser& parser() const noexcept { return *parser_; }
    const ResponseRenderer& renderer() const noexcept { return *renderer_; }

private:
    friend ProtocolFamily create_protocol_family(std::string_view name);
    explicit ProtocolFamily(const ProtocolFamilyFactory& factory)
        : name_(factory.name()), parser_(factory.create_parser()), renderer_(factory.create_renderer()) {}

    std::string name_;
    std::shared_ptr<const RequestParser> parser_;
    std::shared_ptr<const ResponseRenderer> renderer_;
};

/// "text" or "json"; throws FactoryError otherwise.
ProtocolFamily create_protocol_family(std::string_view name);

// ---------------------------------------------------------------------------
// Prototype
// ---------------------------------------------------------------------------

/// Starting state for new sessions. watched_topics is held by pointer so a
/// plain copy shares it; deep_clone does not.
struct SessionTemplate {
    std::string greeting;
    std::string initial_doc;
    std::shared_ptr<std::vector<std::string>> watched_topics = std::make_shared<std::vector<std::string>>();
};

bool structurally_equal(const SessionTemplate& a, const SessionTemplate& b);

SessionTemplate deep_clone(const SessionTemplate& original);
SessionTemplate shallow_clone(const SessionTemplate& original);

// ---------------------------------------------------------------------------
// Literal fixtures
// ---------------------------------------------------------------------------

namespace demo {

// Builder with a director.
struct Product {
    std::vector<std::string> parts;
    void add(std::string part) { parts.push_back(std::move(part)); }
    std::string list_parts() const;
};

class PartsBuilder {
public:
    virtual ~PartsBuilder() = default;
    virtual void build_part_a() = 0;
    virtual void build_part_b() = 0;
};

class TwoPartBuilder final : public PartsBuilder {
public:
    void build_part_a() override { product_.add("Part A"); }
    void build_part_b() override { product_.add("Part B"); }
    const Product& product() const noexcept { return product_; }

private:
    Product product_;
};

class Director {
public:
    void construct(PartsBuilder& builder) const {
        builder.build_part_a();
        builder.build_part_b();
    }
};

std::vector<std::string> demo_build_product(TwoPartBuilder& builder, int director_runs = 1);

// Factory method.
class Button {
public:
    virtual ~Button() = default;
    virtual std::string render() const = 0;
};

class Dialog {
public:
    virtual ~Dialog() = default;
    virtual std::unique_ptr<Button> create_button() const = 0;
    std::string render_dialog() const { return create_button()->render(); }
};

class WindowsDialog final : public Dialog {
public:
    std::unique_ptr<Button> create_button() const override;
};

class MacDialog final : public Dialog {
public:
    std::unique_ptr<Button> create_button() const override;
};

// Abstract factory.
class GuiButton {
public:
    virtual ~GuiButton() = default;
    virtual std::string click() const = 0;
};

class GuiCheckbox {
public:
    virtual ~GuiCheckbox() = default;
    virtual std::string check() const = 0;
};

class GuiFactory {
public:
    virtual ~GuiFactory() = default;
    virtual std::unique_ptr<GuiButton> create_button() const = 0;
    virtual std::unique_ptr<GuiCheckbox> create_checkbox() const = 0;
};

/// "windows" or "mac"; throws FactoryError otherwise.
std::unique_ptr<GuiFactory> create_gui_factory(std::string_view name);

// Prototype.
struct Vehicle {
    std::string name;
    std::string color;

    Vehicle clone() const { return Vehicle{name, color}; }
    std::string to_string() const { return name + " (" + color + ")"; }
};

}  // namespace demo

}  // namespace patternd
