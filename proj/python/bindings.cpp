#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <mutex>
#include <thread>

#include "patternd/creational.hpp"
#include "patternd/expr.hpp"
#include "patternd/policies.hpp"
#include "patternd/protocol.hpp"
#include "patternd/server.hpp"
#include "patternd/service.hpp"

namespace py = pybind11;
using namespace patternd;

namespace {

struct EventBox {
    std::mutex mu;
    std::vector<std::string> lines;
};

struct PySession {
    std::shared_ptr<Session> session;
    std::shared_ptr<EventBox> events;

    std::vector<std::string> drain() {
        std::lock_guard lock(events->mu);
        return std::exchange(events->lines, {});
    }
};

// Runs a Server on a background thread so Python keeps control.
class PyServer {
public:
    explicit PyServer(const ServerConfig& config) : server_(std::make_unique<Server>(config)) {
        thread_ = std::thread([s = server_.get()] { s->run(false); });
    }
    ~PyServer() { stop(); }

    std::uint16_t port() const { return server_->port(); }

    void stop() {
        if (!thread_.joinable()) return;
        server_->stop();
        thread_.join();
    }

private:
    std::unique_ptr<Server> server_;
    std::thread thread_;
};

PlayerState state_from(const std::string& s) {
    for (auto st : kPlayerStates) {
        if (to_string(st) == s) return st;
    }
    throw py::value_error("unknown player state '" + s + "'");
}

PlayerButton button_from(const std::string& s) {
    for (auto b : kPlayerButtons) {
        if (to_string(b) == s) return b;
    }
    throw py::value_error("unknown button '" + s + "'");
}

Context context_from(const std::map<std::string, std::int64_t>& vars) {
    Context ctx;
    for (auto& [k, v] : vars) ctx.set(k, v);
    return ctx;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "patternd core bindings";

    static py::exception<ParseError> parse_error(m, "ParseError", PyExc_ValueError);
    static py::exception<EvalError> eval_error(m, "EvalError", PyExc_ArithmeticError);
    static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ParseError& e) {
            py::set_error(parse_error, e.what());
        } catch (const EvalError& e) {
            py::set_error(eval_error, e.what());
        } catch (const ConfigError& e) {
            py::set_error(config_error, e.what());
        }
    });

    // expressions
    m.def(
        "eval_expr",
        [](const std::string& text, const std::map<std::string, std::int64_t>& vars) {
            return eval_expr(*parse_expr(text), context_from(vars));
        },
        py::arg("text"), py::arg("vars") = std::map<std::string, std::int64_t>{});
    m.def("print_expr", [](const std::string& text) { return print_expr(*parse_expr(text)); });
    m.def("count_nodes", [](const std::string& text) { return count_nodes(*parse_expr(text)); });

    // policies
    m.def("format_money", &format_money, py::arg("minor"));
    m.def(
        "apply_discount",
        [](std::int64_t price, const std::string& strategy) { return apply_discount(parse_strategy(strategy), price); },
        py::arg("price_minor"), py::arg("strategy"));
    m.def(
        "player_press",
        [](const std::string& state, const std::string& button) {
            auto t = player_press(state_from(state), button_from(button));
            return py::make_tuple(t.message, std::string(to_string(t.next)));
        },
        py::arg("state"), py::arg("button"));
    m.def(
        "prepare_document",
        [](const std::string& kind) {
            if (kind != "pdf" && kind != "word") throw py::value_error("kind must be 'pdf' or 'word'");
            return prepare_document(kind == "pdf" ? DocKind::pdf : DocKind::word);
        },
        py::arg("kind"));

    m.def("escape_doc", [](const std::string& t) { return escape_doc(t); });
    m.def("unescape_doc", [](const std::string& t) { return unescape_doc(t); });

    // configuration
    py::class_<ServerConfig>(m, "ServerConfig")
        .def_readonly("port", &ServerConfig::port)
        .def_readonly("workers", &ServerConfig::workers)
        .def_readonly("queue_cap", &ServerConfig::queue_cap)
        .def_readonly("family", &ServerConfig::family)
        .def_readonly("max_conns", &ServerConfig::max_conns)
        .def_readonly("log_path", &ServerConfig::log_path)
        .def("__eq__", [](const ServerConfig& a, const ServerConfig& b) { return a == b; });
    m.def(
        "build_config",
        [](std::optional<std::int64_t> port, std::optional<std::int64_t> workers, std::optional<std::int64_t> queue_cap,
           std::optional<std::string> family, std::optional<std::int64_t> max_conns,
           std::optional<std::string> log_path) {
            ConfigBuilder b;
            if (port) b.port(*port);
            if (workers) b.workers(*workers);
            if (queue_cap) b.queue_cap(*queue_cap);
            if (family) b.family(*family);
            if (max_conns) b.max_conns(*max_conns);
            if (log_path) b.log_path(*log_path);
            return build_config(b);
        },
        py::kw_only(), py::arg("port") = py::none(), py::arg("workers") = py::none(),
        py::arg("queue_cap") = py::none(), py::arg("family") = py::none(), py::arg("max_conns") = py::none(),
        py::arg("log_path") = py::none());

    // in-process dispatch
    py::class_<PySession>(m, "Session")
        .def_property_readonly("id", [](const PySession& s) { return s.session->id(); })
        .def("events", &PySession::drain, "Rendered EVT lines pushed since the last call.");

    py::class_<Service>(m, "Service")
        .def(py::init([](const std::string& family) { return std::make_unique<Service>(family); }),
             py::arg("family") = "text")
        .def(
            "open_session",
            [](Service& svc) {
                auto box = std::make_shared<EventBox>();
                auto* raw = &svc;
                auto session = svc.open_session([box, raw](const Reply& r) {
                    auto line = raw->render(r);
                    std::lock_guard lock(box->mu);
                    box->lines.push_back(std::move(line));
                });
                return PySession{std::move(session), box};
            },
            py::keep_alive<0, 1>())
        .def(
            "handle",
            [](Service& svc, PySession& s, const std::string& line) { return svc.render(svc.handle_line(*s.session, line)); },
            py::arg("session"), py::arg("line"), "Dispatch one request line; returns the rendered reply.");

    py::class_<PyServer>(m, "Server")
        .def(py::init<const ServerConfig&>(), py::arg("config"))
        .def_property_readonly("port", &PyServer::port)
        .def("stop", &PyServer::stop, py::call_guard<py::gil_scoped_release>())
        .def("__enter__", [](PyServer& s) -> PyServer& { return s; })
        .def("__exit__", [](PyServer& s, py::args) { s.stop(); });
}
