#include "patternd/structural.hpp"

#include <chrono>
#include <exception>

namespace patternd {

std::string format_money(Money minor) {
    std::string sign = minor < 0 ? "-" : "";
    // avoid negating INT64_MIN
    auto magnitude = minor < 0 ? static_cast<std::uint64_t>(-(minor + 1)) + 1 : static_cast<std::uint64_t>(minor);
    auto whole = magnitude / 100;
    auto cents = magnitude % 100;
    std::string out = sign + std::to_string(whole) + ".";
    if (cents % 10 == 0) {
        out += std::to_string(cents / 10);
    } else {
        if (cents < 10) out += '0';
        out += std::to_string(cents);
    }
    return out;
}

// --- Decorator ----------------------------------------------------------------

Money layer_delta(CostLayer layer) noexcept {
    switch (layer) {
        case CostLayer::milk:
            return 150;
        case CostLayer::sugar:
            return 50;
    }
    return 0;
}

std::string_view to_string(CostLayer layer) noexcept {
    return layer == CostLayer::milk ? "milk" : "sugar";
}

std::string CostDecorator::description() const { return inner_->description() + ", " + std::string(to_string(layer_)); }

CostPtr decorate_cost(CostPtr base, CostLayer layer) {
    if (!base) throw std::invalid_argument("null cost component");
    return std::make_shared<CostDecorator>(std::move(base), layer);
}

CostPtr decorate_cost(CostPtr base, std::initializer_list<CostLayer> layers) {
    for (auto layer : layers) base = decorate_cost(std::move(base), layer);
    return base;
}

namespace {

class MiddlewareHandler final : public Handler {
public:
    MiddlewareHandler(std::shared_ptr<Handler> inner, Middleware kind, std::shared_ptr<Logger> logger,
                      Registry& registry)
        : inner_(std::move(inner)), kind_(kind), logger_(std::move(logger)), registry_(&registry) {}

    bool accepts(const Request& request) const override { return inner_->accepts(request); }

    Reply answer(const Request& request) const override {
        if (kind_ == Middleware::timing) {
            auto start = std::chrono::steady_clock::now();
            Reply reply = inner_->answer(request);
            auto us = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
            auto key = name();
            registry_->increment("requests." + key);
            registry_->increment("elapsed_us." + key, static_cast<std::uint64_t>(us.count()));
            return reply;
        }
        Reply reply = inner_->answer(request);
        if (logger_) logger_->log_at(LogLevel::info, summarize(request, reply));
        return reply;
    }

    std::string name() const override { return inner_->name(); }

private:
    static std::string summarize(const Request& request, const Reply& reply) {
        std::string line = request.verb + " -> ";
        if (auto* e = std::get_if<ErrReply>(&reply)) {
            line += "ERR ";
            line += to_string(e->code);
        } else {
            line += "OK";
        }
        return line;
    }

    std::shared_ptr<Handler> inner_;
    Middleware kind_;
    std::shared_ptr<Logger> logger_;
    Registry* registry_;
};

}  // namespace

std::shared_ptr<Handler> decorate_handler(std::shared_ptr<Handler> inner, Middleware middleware,
                                          std::shared_ptr<Logger> logger, Registry& registry) {
    if (!inner) throw std::invalid_argument("null handler");
    auto next = inner->successor();
    auto wrapped = std::make_shared<MiddlewareHandler>(std::move(inner), middleware, std::move(logger), registry);
    wrapped->set_successor(std::move(next));
    return wrapped;
}

std::shared_ptr<Handler> decorate_handler(std::shared_ptr<Handler> inner, std::initializer_list<Middleware> layers,
                                          std::shared_ptr<Logger> logger, Registry& registry) {
    for (auto m : layers) inner = decorate_handler(std::move(inner), m, logger, registry);
    return inner;
}

// --- Facade -------------------------------------------------------------------

std::string SimulatedFileStore::read(const std::string& file_name) { return "Reading data from " + file_name; }

std::string SimulatedFileStore::write(const std::string& file_name, const std::string& data) {
    return "Writing " + data + " to " + file_name;
}

std::string EmailNotifier::notify(const std::string& recipient) {
    return "Sending email to " + recipient + ": File processed";
}

FileProcessingFacade::FileProcessingFacade(std::shared_ptr<FileStore> store, std::shared_ptr<Notifier> notifier,
                                           std::shared_ptr<Logger> logger)
    : store_(std::move(store)), notifier_(std::move(notifier)), logger_(std::move(logger)) {
    if (!store_ || !notifier_ || !logger_) throw std::invalid_argument("facade needs a store, notifier and logger");
}

std::string FileProcessingFacade::process_and_notify(const std::string& file_name, const std::string& data,
                                                     const std::string& recipient) {
    auto step = [&](const char* what, auto&& fn) {
        std::string result;
        try {
            result = fn();
        } catch (const std::exception& e) {
            logger_->log_at(LogLevel::error, std::string(what) + " failed: " + e.what());
            throw FacadeError(std::string(what) + " failed: " + e.what());
        }
        logger_->log_message(result);
    };
    step("read", [&] { return store_->read(file_name); });
    step("write", [&] { return store_->write(file_name, data); });
    step("notify", [&] { return notifier_->notify(recipient); });
    return "File " + file_name + " processed and notification sent to " + recipient;
}

std::string facade_process_and_notify(FileProcessingFacade& facade, const std::string& file_name,
                                      const std::string& data, const std::string& recipient) {
    return facade.process_and_notify(file_name, data, recipient);
}

// --- Proxy --------------------------------------------------------------------

StatsSnapshot RegistryStats::request(std::vector<std::string>& trace) {
    trace.emplace_back("handle");
    return registry_->counters();
}

LazyStatsProxy::LazyStatsProxy(Factory factory) : factory_(std::move(factory)) {
    if (!factory_) throw std::invalid_argument("null stats factory");
}

StatsSnapshot LazyStatsProxy::request() {
    std::lock_guard lock(mu_);
    if (!real_) {
        ++attempts_;
        trace_.emplace_back("create");
        auto made = factory_();
        if (!made) throw std::runtime_error("stats factory returned null");
        real_ = std::move(made);
    }
    trace_.emplace_back("forward");
    return real_->request(trace_);
}

bool LazyStatsProxy::created() const {
    std::lock_guard lock(mu_);
    return real_ != nullptr;
}

std::uint64_t LazyStatsProxy::construction_attempts() const {
    std::lock_guard lock(mu_);
    return attempts_;
}

std::vector<std::string> LazyStatsProxy::trace() const {
    std::lock_guard lock(mu_);
    return trace_;
}

void LazyStatsProxy::clear_trace() {
    std::lock_guard lock(mu_);
    trace_.clear();
}

StatsSnapshot proxy_request(LazyStatsProxy& proxy) { return proxy.request(); }

// --- Bridge -------------------------------------------------------------------

std::string VectorRenderer::render_circle(std::int64_t radius) const {
    return "Drawing a circle of radius " + std::to_string(radius) + " using vector rendering.";
}

std::string RasterRenderer::render_circle(std::int64_t radius) const {
    return "Drawing pixels for a circle of radius " + std::to_string(radius) + " using raster rendering.";
}

CircleShape::CircleShape(std::shared_ptr<const Renderer> renderer, std::int64_t radius)
    : Shape(std::move(renderer)), radius_(radius) {
    if (radius < 1) throw std::invalid_argument("radius must be positive");
}

void CircleShape::resize(std::int64_t factor) {
    if (factor < 1) throw std::invalid_argument("resize factor must be >= 1");
    std::int64_t scaled = 0;
    if (__builtin_mul_overflow(radius_, factor, &scaled)) throw std::overflow_error("radius overflow");
    radius_ = scaled;
}

std::string bridge_draw(const Shape& shape) { return shape.draw(); }
void bridge_resize(Shape& shape, std::int64_t factor) { shape.resize(factor); }

namespace demo {

std::string OldPaymentSystem::make_payment(std::int64_t amount) const {
    return "Processing payment of $" + std::to_string(amount) + " in the old system";
}

}  // namespace demo

}  // namespace patternd
