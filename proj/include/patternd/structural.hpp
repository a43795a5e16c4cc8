#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "patternd/creational.hpp"
#include "patternd/logging.hpp"
#include "patternd/messaging.hpp"

namespace patternd {

/// Money in minor units (cents).
using Money = std::int64_t;

/// 700 -> "7.0", 9000 -> "90.0", 8999 -> "89.99", -150 -> "-1.5".
std::string format_money(Money minor);

// ---------------------------------------------------------------------------
// Decorator: cost layers
// ---------------------------------------------------------------------------

class CostComponent {
public:
    virtual ~CostComponent() = default;
    virtual Money cost() const = 0;
    virtual std::string description() const = 0;
};

using CostPtr = std::shared_ptr<const CostComponent>;

class SimpleCoffee final : public CostComponent {
public:
    explicit SimpleCoffee(Money base = 500) : base_(base) {
        if (base < 0) throw std::invalid_argument("base cost must be non-negative");
    }
    Money cost() const override { return base_; }
    std::string description() const override { return "Simple coffee"; }

private:
    Money base_;
};

enum class CostLayer { milk, sugar };

Money layer_delta(CostLayer layer) noexcept;
std::string_view to_string(CostLayer layer) noexcept;

class CostDecorator final : public CostComponent {
public:
    CostDecorator(CostPtr inner, CostLayer layer) : inner_(std::move(inner)), layer_(layer) {}
    Money cost() const override { return inner_->cost() + layer_delta(layer_); }
    std::string description() const override;
    CostLayer layer() const noexcept { return layer_; }

private:
    CostPtr inner_;
    CostLayer layer_;
};

CostPtr decorate_cost(CostPtr base, CostLayer layer);
CostPtr decorate_cost(CostPtr base, std::initializer_list<CostLayer> layers);

// ---------------------------------------------------------------------------
// Decorator: handler middleware
// ---------------------------------------------------------------------------

enum class Middleware { logging, timing };

/// Wraps one chain node. The wrapper accepts exactly what the inner node
/// accepts and returns its reply untouched. logging writes one record per
/// answered request; timing adds "requests.<name>" and "elapsed_us.<name>"
/// to the registry counters.
std::shared_ptr<Handler> decorate_handler(std::shared_ptr<Handler> inner, Middleware middleware,
                                          std::shared_ptr<Logger> logger, Registry& registry);

/// Applies the layers innermost first.
std::shared_ptr<Handler> decorate_handler(std::shared_ptr<Handler> inner, std::initializer_list<Middleware> layers,
                                          std::shared_ptr<Logger> logger, Registry& registry);

// ---------------------------------------------------------------------------
// Facade
// ---------------------------------------------------------------------------

class FacadeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FileStore {
public:
    virtual ~FileStore() = default;
    virtual std::string read(const std::string& file_name) = 0;
    virtual std::string write(const std::string& file_name, const std::string& data) = 0;
};

class Notifier {
public:
    virtual ~Notifier() = default;
    virtual std::string notify(const std::string& recipient) = 0;
};

/// "Reading data from <f>" / "Writing <data> to <f>".
class SimulatedFileStore final : public FileStore {
public:
    std::string read(const std::string& file_name) override;
    std::string write(const std::string& file_name, const std::string& data) override;
};

/// "Sending email to <r>: File processed".
class EmailNotifier final : public Notifier {
public:
    std::string notify(const std::string& recipient) override;
};

class FileProcessingFacade {
public:
    FileProcessingFacade(std::shared_ptr<FileStore> store, std::shared_ptr<Notifier> notifier,
                         std::shared_ptr<Logger> logger);

    /// read, write, notify in that order, logging each result. The first
    /// failing step is logged at error level and rethrown as FacadeError.
    std::string process_and_notify(const std::string& file_name, const std::string& data,
                                   const std::string& recipient);

private:
    std::shared_ptr<FileStore> store_;
    std::shared_ptr<Notifier> notifier_;
    std::shared_ptr<Logger> logger_;
};

std::string facade_process_and_notify(FileProcessingFacade& facade, const std::string& file_name,
                                      const std::string& data, const std::string& recipient);

// ---------------------------------------------------------------------------
// Proxy
// ---------------------------------------------------------------------------

using StatsSnapshot = std::map<std::string, std::uint64_t>;

class StatsSubject {
public:
    virtual ~StatsSubject() = default;
    /// Appends "handle" to the trace.
    virtual StatsSnapshot request(std::vector<std::string>& trace) = 0;
};

/// Real subject: a snapshot of the registry counters.
class RegistryStats final : public StatsSubject {
public:
    explicit RegistryStats(Registry& registry) : registry_(&registry) {}
    StatsSnapshot request(std::vector<std::string>& trace) override;

private:
    Registry* registry_;
};

/// Virtual proxy. The subject is built on the first request, never in the
/// constructor. A throwing factory leaves the proxy empty and the next
/// request tries again.
class LazyStatsProxy {
public:
    using Factory = std::function<std::unique_ptr<StatsSubject>()>;

    explicit LazyStatsProxy(Factory factory);

    StatsSnapshot request();

    bool created() const;
    std::uint64_t construction_attempts() const;
    /// "create", "forward", "handle" tags in the order they happened.
    std::vector<std::string> trace() const;
    void clear_trace();

private:
    Factory factory_;
    mutable std::mutex mu_;
    std::unique_ptr<StatsSubject> real_;
    std::uint64_t attempts_ = 0;
    std::vector<std::string> trace_;
};

StatsSnapshot proxy_request(LazyStatsProxy& proxy);

// ---------------------------------------------------------------------------
// Bridge
// ---------------------------------------------------------------------------

class Renderer {
public:
    virtual ~Renderer() = default;
    virtual std::string render_circle(std::int64_t radius) const = 0;
};

class VectorRenderer final : public Renderer {
public:
    std::string render_circle(std::int64_t radius) const override;
};

class RasterRenderer final : public Renderer {
public:
    std::string render_circle(std::int64_t radius) const override;
};

class Shape {
public:
    explicit Shape(std::shared_ptr<const Renderer> renderer) : renderer_(std::move(renderer)) {}
    virtual ~Shape() = default;
    virtual std::string draw() const = 0;
    virtual void resize(std::int64_t factor) = 0;

protected:
    const Renderer& renderer() const { return *renderer_; }

private:
    std::shared_ptr<const Renderer> renderer_;
};

class CircleShape final : public Shape {
public:
    /// Throws std::invalid_argument unless radius >= 1.
    CircleShape(std::shared_ptr<const Renderer> renderer, std::int64_t radius);
    std::string draw() const override { return renderer().render_circle(radius_); }
    /// factor >= 1.
    void resize(std::int64_t factor) override;
    std::int64_t radius() const noexcept { return radius_; }

private:
    std::int64_t radius_;
};

std::string bridge_draw(const Shape& shape);
void bridge_resize(Shape& shape, std::int64_t factor);

// ---------------------------------------------------------------------------
// Literal fixtures
// ---------------------------------------------------------------------------

namespace demo {

class OldPaymentSystem {
public:
    std::string make_payment(std::int64_t amount) const;
};

class PaymentProcessor {
public:
    virtual ~PaymentProcessor() = default;
    virtual std::string process_payment(std::int64_t amount) const = 0;
};

class PaymentAdapter final : public PaymentProcessor {
public:
    explicit PaymentAdapter(std::shared_ptr<const OldPaymentSystem> legacy) : legacy_(std::move(legacy)) {}
    std::string process_payment(std::int64_t amount) const override { return legacy_->make_payment(amount); }

private:
    std::shared_ptr<const OldPaymentSystem> legacy_;
};

}  // namespace demo

}  // namespace patternd
