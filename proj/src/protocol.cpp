#include "patternd/protocol.hpp"

#include <json.hpp>

#include "patternd/creational.hpp"

namespace patternd {

std::string escape_doc(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '\n') {
            out += "\\n";
        } else if (c == '\\') {
            out += "\\\\";
        } else {
            out += c;
        }
    }
    return out;
}

std::string unescape_doc(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '\\') {
            out += text[i];
            continue;
        }
        if (i + 1 == text.size()) throw EscapeError("dangling backslash at offset " + std::to_string(i));
        char next = text[++i];
        if (next == 'n') {
            out += '\n';
        } else if (next == '\\') {
            out += '\\';
        } else {
            throw EscapeError("unknown escape '\\" + std::string(1, next) + "' at offset " + std::to_string(i - 1));
        }
    }
    return out;
}

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_verb(std::string_view token) {
    if (token.empty()) return false;
    for (char c : token) {
        if (c < 'A' || c > 'Z') return false;
    }
    return true;
}

void check_length(std::string_view line) {
    if (line.size() > kMaxLineBytes) {
        throw RequestParseError("request longer than " + std::to_string(kMaxLineBytes) + " bytes");
    }
}

// Rendered lines must stay single lines.
std::string one_line(std::string_view text) {
    std::string out(text);
    for (auto& c : out) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return out;
}

std::string dump(const ordered_json& j) {
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

// --- text -------------------------------------------------------------------

class TextParser final : public RequestParser {
public:
    Request parse(std::string_view line) const override {
        check_length(line);
        if (line.empty()) throw RequestParseError("empty request");
        auto space = line.find(' ');
        auto verb = line.substr(0, space);
        if (!is_verb(verb)) throw RequestParseError("malformed verb");
        Request req;
        req.verb = std::string(verb);
        if (space != std::string_view::npos) req.args = std::string(line.substr(space + 1));
        return req;
    }

    std::string format(const Request& request) const override {
        return request.args.empty() ? request.verb : request.verb + " " + request.args;
    }
};

class TextRenderer final : public ResponseRenderer {
public:
    std::string render(const Reply& reply) const override {
        return std::visit(
            [](const auto& r) -> std::string {
                using R = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<R, OkReply>) {
                    return r.payload.empty() ? "OK" : "OK " + one_line(r.payload);
                } else if constexpr (std::is_same_v<R, ErrReply>) {
                    std::string line = "ERR " + std::string(to_string(r.code));
                    if (!r.message.empty()) line += " " + one_line(r.message);
                    return line;
                } else {
                    return "EVT " + one_line(r.line);
                }
            },
            reply);
    }

    Reply read(std::string_view line) const override {
        if (line == "OK") return ok();
        if (line.starts_with("OK ")) return ok(std::string(line.substr(3)));
        if (line.starts_with("EVT ")) return evt(std::string(line.substr(4)));
        if (line.starts_with("ERR ")) {
            auto rest = line.substr(4);
            auto space = rest.find(' ');
            auto code = err_code_from_string(rest.substr(0, space));
            if (!code) throw RequestParseError("unknown error code in reply");
            return err(*code, space == std::string_view::npos ? std::string() : std::string(rest.substr(space + 1)));
        }
        throw RequestParseError("not a text-family reply");
    }
};

class TextFamily final : public ProtocolFamilyFactory {
public:
    std::string name() const override { return "text"; }
    std::shared_ptr<const RequestParser> create_parser() const override { return std::make_shared<TextParser>(); }
    std::shared_ptr<const ResponseRenderer> create_renderer() const override {
        return std::make_shared<TextRenderer>();
    }
};

// --- json -------------------------------------------------------------------

class JsonParser final : public RequestParser {
public:
    Request parse(std::string_view line) const override {
        check_length(line);
        auto j = ordered_json::parse(line.begin(), line.end(), nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw RequestParseError("request is not a JSON object");
        auto verb = j.find("verb");
        if (verb == j.end() || !verb->is_string()) throw RequestParseError("missing string field \"verb\"");
        Request req;
        req.verb = verb->get<std::string>();
        if (!is_verb(req.verb)) throw RequestParseError("malformed verb");
        if (auto args = j.find("args"); args != j.end()) {
            if (!args->is_string()) throw RequestParseError("field \"args\" must be a string");
            req.args = args->get<std::string>();
        }
        return req;
    }

    std::string format(const Request& request) const override {
        ordered_json j;
        j["verb"] = request.verb;
        if (!request.args.empty()) j["args"] = request.args;
        return dump(j);
    }
};

class JsonRenderer final : public ResponseRenderer {
public:
    std::string render(const Reply& reply) const override {
        ordered_json j;
        std::visit(
            [&](const auto& r) {
                using R = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<R, OkReply>) {
                    j["ok"] = true;
                    j["value"] = r.payload;
                } else if constexpr (std::is_same_v<R, ErrReply>) {
                    j["ok"] = false;
                    j["code"] = std::string(to_string(r.code));
                    j["message"] = r.message;
                } else {
                    j["evt"] = r.line;
                }
            },
            reply);
        return dump(j);
    }

    Reply read(std::string_view line) const override {
        auto j = ordered_json::parse(line.begin(), line.end(), nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw RequestParseError("not a json-family reply");
        if (auto e = j.find("evt"); e != j.end() && e->is_string()) return evt(e->get<std::string>());
        auto okf = j.find("ok");
        if (okf == j.end() || !okf->is_boolean()) throw RequestParseError("reply lacks \"ok\"");
        if (okf->get<bool>()) {
            auto v = j.find("value");
            if (v == j.end() || !v->is_string()) throw RequestParseError("reply lacks \"value\"");
            return ok(v->get<std::string>());
        }
        auto c = j.find("code");
        auto m = j.find("message");
        if (c == j.end() || !c->is_string() || m == j.end() || !m->is_string()) {
            throw RequestParseError("error reply lacks \"code\"/\"message\"");
        }
        auto code = err_code_from_string(c->get<std::string>());
        if (!code) throw RequestParseError("unknown error code in reply");
        return err(*code, m->get<std::string>());
    }
};

class JsonFamily final : public ProtocolFamilyFactory {
public:
    std::string name() const override { return "json"; }
    std::shared_ptr<const RequestParser> create_parser() const override { return std::make_shared<JsonParser>(); }
    std::shared_ptr<const ResponseRenderer> create_renderer() const override {
        return std::make_shared<JsonRenderer>();
    }
};

}  // namespace

ProtocolFamily create_protocol_family(std::string_view name) {
    if (name == "text") return ProtocolFamily(TextFamily());
    if (name == "json") return ProtocolFamily(JsonFamily());
    throw FactoryError("unknown protocol family '" + std::string(name) + "'; expected text or json");
}

}  // namespace patternd
