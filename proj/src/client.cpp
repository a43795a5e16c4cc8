#include "patternd/client.hpp"

#include <cerrno>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sys/socket.h>
#include <thread>

#include <json.hpp>

#include "patternd/reactor.hpp"

namespace patternd {

LineKind classify_line(std::string_view line) {
    if (line.starts_with("EVT ")) return LineKind::evt;
    if (line == "OK" || line.starts_with("OK ")) return LineKind::ok;
    if (line.starts_with("ERR ")) return LineKind::err;
    if (line.starts_with("{")) {
        auto j = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
        if (j.is_object()) {
            if (j.contains("evt")) return LineKind::evt;
            if (auto it = j.find("ok"); it != j.end() && it->is_boolean()) {
                return it->get<bool>() ? LineKind::ok : LineKind::err;
            }
        }
    }
    return LineKind::other;
}

namespace {

// Replies seen by the reader thread but not yet claimed by the sender.
struct ReplySlots {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<bool> is_err;  // oldest first
    bool closed = false;
};

enum class Wait { ok, err, timeout, closed };

Wait wait_reply(ReplySlots& slots, std::chrono::milliseconds timeout) {
    std::unique_lock lock(slots.mu);
    bool ready = slots.cv.wait_for(lock, timeout, [&] { return !slots.is_err.empty() || slots.closed; });
    if (!ready) return Wait::timeout;
    if (slots.is_err.empty()) return Wait::closed;
    bool was_err = slots.is_err.front();
    slots.is_err.pop_front();
    return was_err ? Wait::err : Wait::ok;
}

}  // namespace

int repl(const ClientConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err) {
    if (cfg.timeout_ms < 1) {
        err << "error: --timeout-ms must be at least 1\n";
        return client_failure;
    }
    std::ifstream script_file;
    std::istream* source = &in;
    if (cfg.script) {
        script_file.open(*cfg.script);
        if (!script_file) {
            err << "error: cannot open script " << *cfg.script << "\n";
            return client_failure;
        }
        source = &script_file;
    }
    const bool script_mode = cfg.script.has_value();
    const auto timeout = std::chrono::milliseconds(cfg.timeout_ms);

    UniqueFd sock;
    try {
        sock = connect_tcp(cfg.host, cfg.port, timeout);
    } catch (const std::exception& e) {
        err << "error: cannot connect to " << cfg.host << ":" << cfg.port << ": " << e.what() << "\n";
        return client_failure;
    }

    std::mutex out_mu;
    ReplySlots slots;
    int fd = sock.get();
    std::thread reader([&] {
        std::string buf;
        char chunk[4096];
        for (;;) {
            auto n = ::recv(fd, chunk, sizeof chunk, 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) break;
            buf.append(chunk, static_cast<std::size_t>(n));
            std::size_t start = 0;
            for (auto lf = buf.find('\n'); lf != std::string::npos; lf = buf.find('\n', start)) {
                std::string line = buf.substr(start, lf - start);
                start = lf + 1;
                auto kind = classify_line(line);
                {
                    std::lock_guard lock(out_mu);
                    if (kind == LineKind::evt) out << "* ";
                    out << line << std::endl;
                }
                if (kind == LineKind::evt) continue;
                std::lock_guard lock(slots.mu);
                slots.is_err.push_back(kind == LineKind::err);
                slots.cv.notify_all();
            }
            buf.erase(0, start);
        }
        std::lock_guard lock(slots.mu);
        slots.closed = true;
        slots.cv.notify_all();
    });

    auto finish = [&](int code) {
        ::shutdown(fd, SHUT_RDWR);
        reader.join();
        return code;
    };

    // greeting
    switch (wait_reply(slots, timeout)) {
        case Wait::ok:
            break;
        case Wait::err:
            err << "error: server refused the connection\n";
            return finish(client_failure);
        case Wait::timeout:
            err << "error: timed out waiting for the greeting\n";
            return finish(client_failure);
        case Wait::closed:
            err << "error: connection closed before the greeting\n";
            return finish(client_failure);
    }

    std::string line;
    while (std::getline(*source, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            line += '\n';
            write_all(fd, line.data(), line.size());
            line.pop_back();
        } catch (const std::exception& e) {
            err << "error: send failed: " << e.what() << "\n";
            return finish(client_failure);
        }
        auto result = wait_reply(slots, timeout);
        if (result == Wait::timeout) {
            err << "error: no reply within " << cfg.timeout_ms << " ms\n";
            return finish(client_failure);
        }
        if (result == Wait::closed) {
            err << "error: connection closed by server\n";
            return finish(client_failure);
        }
        if (result == Wait::err && script_mode) return finish(client_err_reply);
        if (line == "QUIT" || line.starts_with("QUIT ")) break;
    }
    return finish(client_ok);
}

}  // namespace patternd
