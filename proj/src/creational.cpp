#include "patternd/creational.hpp"

#include <algorithm>

namespace patternd {

// --- Builder ------------------------------------------------------------------

namespace {

std::size_t checked_count(const std::optional<std::int64_t>& value, std::size_t fallback, const char* field,
                          std::int64_t max) {
    if (!value) return fallback;
    if (*value < 1 || *value > max) {
        throw ConfigError(field, "must be between 1 and " + std::to_string(max) + ", got " + std::to_string(*value));
    }
    return static_cast<std::size_t>(*value);
}

}  // namespace

ServerConfig ConfigBuilder::build() const {
    ServerConfig cfg;
    if (port_) {
        if (*port_ < 0 || *port_ > 65535) {
            throw ConfigError("port", "must be between 0 and 65535, got " + std::to_string(*port_));
        }
        cfg.port = static_cast<std::uint16_t>(*port_);
    }
    cfg.workers = checked_count(workers_, cfg.workers, "workers", 1024);
    cfg.queue_cap = checked_count(queue_cap_, cfg.queue_cap, "queue_cap", 1 << 20);
    if (family_) {
        if (*family_ != "text" && *family_ != "json") {
            throw ConfigError("family", "must be \"text\" or \"json\", got \"" + *family_ + "\"");
        }
        cfg.family = *family_;
    }
    cfg.max_conns = checked_count(max_conns_, cfg.max_conns, "max_conns", 1 << 20);
    if (log_path_) {
        if (log_path_->empty()) throw ConfigError("log_path", "must not be empty");
        cfg.log_path = *log_path_;
    }
    return cfg;
}

ServerConfig build_config(const ConfigBuilder& builder) { return builder.build(); }

// --- Registry -----------------------------------------------------------------

namespace {

std::atomic<std::uint64_t> g_registry_constructions{0};
std::atomic<Registry*> g_registry{nullptr};
std::mutex g_registry_mu;

}  // namespace

Registry::Registry() : logger_(adapt_logger(std::make_shared<NullSink>())) { ++g_registry_constructions; }

Registry& Registry::instance() {
    if (auto* p = g_registry.load(std::memory_order_acquire)) return *p;
    std::lock_guard lock(g_registry_mu);
    auto* p = g_registry.load(std::memory_order_relaxed);
    if (!p) {
        p = new Registry();
        g_registry.store(p, std::memory_order_release);
    }
    return *p;
}

std::uint64_t Registry::construction_count() noexcept { return g_registry_constructions.load(); }

void Registry::reset_for_testing() {
    std::lock_guard lock(g_registry_mu);
    delete g_registry.exchange(nullptr);
    g_registry_constructions = 0;
}

void Registry::configure(ServerConfig config) {
    std::lock_guard lock(mu_);
    config_ = std::move(config);
}

ServerConfig Registry::config() const {
    std::lock_guard lock(mu_);
    return config_;
}

void Registry::increment(std::string_view name, std::uint64_t delta) {
    std::lock_guard lock(mu_);
    auto it = counters_.find(name);
    if (it == counters_.end()) {
        counters_.emplace(std::string(name), delta);
    } else {
        it->second += delta;
    }
}

std::uint64_t Registry::counter(std::string_view name) const {
    std::lock_guard lock(mu_);
    auto it = counters_.find(name);
    return it == counters_.end() ? 0 : it->second;
}

std::map<std::string, std::uint64_t> Registry::counters() const {
    std::lock_guard lock(mu_);
    return {counters_.begin(), counters_.end()};
}

void Registry::set_logger(std::shared_ptr<Logger> logger) {
    if (!logger) logger = adapt_logger(std::make_shared<NullSink>());
    std::lock_guard lock(mu_);
    logger_ = std::move(logger);
}

std::shared_ptr<Logger> Registry::logger() const {
    std::lock_guard lock(mu_);
    return logger_;
}

// --- Factory method -----------------------------------------------------------

std::shared_ptr<Handler> HandlerFactory::create(std::string_view kind) const {
    if (std::find(kHandlerKinds.begin(), kHandlerKinds.end(), kind) == kHandlerKinds.end()) {
        std::string known;
        for (auto k : kHandlerKinds) {
            if (!known.empty()) known += ", ";
            known += k;
        }
        throw FactoryError("unknown handler kind '" + std::string(kind) + "'; registered kinds: " + known);
    }
    return make(kind);
}

std::shared_ptr<Handler> create_handler(const HandlerFactory& factory, std::string_view kind) {
    return factory.create(kind);
}

// --- Prototype ----------------------------------------------------------------

bool structurally_equal(const SessionTemplate& a, const SessionTemplate& b) {
    auto topics = [](const SessionTemplate& t) {
        return t.watched_topics ? *t.watched_topics : std::vector<std::string>{};
    };
    return a.greeting == b.greeting && a.initial_doc == b.initial_doc && topics(a) == topics(b);
}

SessionTemplate deep_clone(const SessionTemplate& original) {
    SessionTemplate copy;
    copy.greeting = original.greeting;
    copy.initial_doc = original.initial_doc;
    copy.watched_topics = std::make_shared<std::vector<std::string>>(
        original.watched_topics ? *original.watched_topics : std::vector<std::string>{});
    return copy;
}

SessionTemplate shallow_clone(const SessionTemplate& original) { return original; }

// --- Fixtures -----------------------------------------------------------------

namespace demo {

std::string Product::list_parts() const {
    std::string out = "Product parts: ";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ", ";
        out += parts[i];
    }
    return out;
}

std::vector<std::string> demo_build_product(TwoPartBuilder& builder, int director_runs) {
    Director director;
    for (int i = 0; i < director_runs; ++i) director.construct(builder);
    return builder.product().parts;
}

namespace {

class WindowsButton final : public Button {
public:
    std::string render() const override { return "Rendering a Windows button."; }
};

class MacButton final : public Button {
public:
    std::string render() const override { return "Rendering a Mac button."; }
};

class WindowsGuiButton final : public GuiButton {
public:
    std::string click() const override { return "Windows Button clicked!"; }
};

class WindowsGuiCheckbox final : public GuiCheckbox {
public:
    std::string check() const override { return "Windows Checkbox checked!"; }
};

class MacGuiButton final : public GuiButton {
public:
    std::string click() const override { return "Mac Button clicked!"; }
};

class MacGuiCheckbox final : public GuiCheckbox {
public:
    std::string check() const override { return "Mac Checkbox checked!"; }
};

class WindowsFactory final : public GuiFactory {
public:
    std::unique_ptr<GuiButton> create_button() const override { return std::make_unique<WindowsGuiButton>(); }
    std::unique_ptr<GuiCheckbox> create_checkbox() const override { return std::make_unique<WindowsGuiCheckbox>(); }
};

class MacFactory final : public GuiFactory {
public:
    std::unique_ptr<GuiButton> create_button() const override { return std::make_unique<MacGuiButton>(); }
    std::unique_ptr<GuiCheckbox> create_checkbox() const override { return std::make_unique<MacGuiCheckbox>(); }
};

}  // namespace

std::unique_ptr<Button> WindowsDialog::create_button() const { return std::make_unique<WindowsButton>(); }

std::unique_ptr<Button> MacDialog::create_button() const { return std::make_unique<MacButton>(); }

std::unique_ptr<GuiFactory> create_gui_factory(std::string_view name) {
    if (name == "windows") return std::make_unique<WindowsFactory>();
    if (name == "mac") return std::make_unique<MacFactory>();
    throw FactoryError("unknown GUI family '" + std::string(name) + "'");
}

}  // namespace demo

}  // namespace patternd
