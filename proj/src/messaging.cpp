#include "patternd/messaging.hpp"

#include <algorithm>
#include <array>
#include <exception>

namespace patternd {

namespace {

constexpr std::array<std::pair<ErrCode, std::string_view>, 7> kErrCodes{{
    {ErrCode::eval, "EVAL"},
    {ErrCode::empty, "EMPTY"},
    {ErrCode::unknown, "UNKNOWN"},
    {ErrCode::parse, "PARSE"},
    {ErrCode::state, "STATE"},
    {ErrCode::limit, "LIMIT"},
    {ErrCode::internal, "INTERNAL"},
}};

}  // namespace

std::string_view to_string(ErrCode code) {
    for (auto& [c, name] : kErrCodes) {
        if (c == code) return name;
    }
    return "INTERNAL";
}

std::optional<ErrCode> err_code_from_string(std::string_view token) {
    for (auto& [c, name] : kErrCodes) {
        if (name == token) return c;
    }
    return std::nullopt;
}

// --- Observer -----------------------------------------------------------------

std::string format_temperature_display(std::string_view observer_name, std::int64_t temperature) {
    std::string out(observer_name);
    out += ": The current temperature is ";
    out += std::to_string(temperature);
    out += ".0°C";
    return out;
}

Subject::Subject(std::shared_ptr<Logger> failure_log) : failure_log_(std::move(failure_log)) {}

void Subject::subscribe(std::shared_ptr<TemperatureObserver> observer) {
    if (!observer) throw MessagingError("null observer");
    std::lock_guard lock(mu_);
    if (std::find(observers_.begin(), observers_.end(), observer) != observers_.end()) {
        throw MessagingError("observer '" + observer->name() + "' is already subscribed");
    }
    observers_.push_back(std::move(observer));
}

void Subject::unsubscribe(const std::shared_ptr<TemperatureObserver>& observer) {
    std::lock_guard lock(mu_);
    auto it = std::find(observers_.begin(), observers_.end(), observer);
    if (it == observers_.end()) {
        throw MessagingError("observer '" + (observer ? observer->name() : std::string("null")) +
                             "' is not subscribed");
    }
    observers_.erase(it);
}

bool Subject::is_subscribed(const std::shared_ptr<TemperatureObserver>& observer) const {
    std::lock_guard lock(mu_);
    return std::find(observers_.begin(), observers_.end(), observer) != observers_.end();
}

std::size_t Subject::publish_state(std::int64_t value) {
    std::lock_guard publishing(publish_mu_);
    std::vector<std::shared_ptr<TemperatureObserver>> snapshot;
    {
        std::lock_guard lock(mu_);
        state_ = value;
        snapshot = observers_;
    }
    std::size_t calls = 0;
    for (auto& observer : snapshot) {
        ++calls;
        try {
            observer->update(value);
        } catch (const std::exception& e) {
            if (failure_log_) {
                failure_log_->log_at(LogLevel::warn, "observer " + observer->name() + " failed: " + e.what());
            }
        } catch (...) {
            if (failure_log_) failure_log_->log_at(LogLevel::warn, "observer " + observer->name() + " failed");
        }
    }
    return calls;
}

std::int64_t Subject::state() const {
    std::lock_guard lock(mu_);
    return state_;
}

std::size_t Subject::observer_count() const {
    std::lock_guard lock(mu_);
    return observers_.size();
}

void DisplayObserver::update(std::int64_t temperature) {
    auto line = format_temperature_display(name_, temperature);
    std::lock_guard lock(mu_);
    lines_.push_back(std::move(line));
}

std::vector<std::string> DisplayObserver::lines() const {
    std::lock_guard lock(mu_);
    return lines_;
}

// --- Mediator -----------------------------------------------------------------

std::string format_chat_line(std::string_view user, std::string_view message) {
    std::string line = "[";
    line += user;
    line += "] ";
    line += message;
    return line;
}

void ChatRoom::join(std::shared_ptr<ChatMember> member) {
    if (!member) throw MessagingError("null chat member");
    std::lock_guard lock(mu_);
    auto name = member->name();
    for (auto& m : members_) {
        if (m->name() == name) throw MessagingError("'" + name + "' is already in the room");
    }
    members_.push_back(std::move(member));
}

bool ChatRoom::leave(std::string_view name) {
    std::lock_guard lock(mu_);
    auto it = std::find_if(members_.begin(), members_.end(), [&](auto& m) { return m->name() == name; });
    if (it == members_.end()) return false;
    members_.erase(it);
    return true;
}

bool ChatRoom::is_member(std::string_view name) const {
    std::lock_guard lock(mu_);
    return std::any_of(members_.begin(), members_.end(), [&](auto& m) { return m->name() == name; });
}

std::size_t ChatRoom::size() const {
    std::lock_guard lock(mu_);
    return members_.size();
}

std::size_t ChatRoom::send(std::string_view user, std::string_view message) {
    std::vector<std::shared_ptr<ChatMember>> recipients;
    {
        std::lock_guard lock(mu_);
        bool member = std::any_of(members_.begin(), members_.end(), [&](auto& m) { return m->name() == user; });
        if (!member) throw MessagingError("'" + std::string(user) + "' is not in the room");
        recipients = members_;
    }
    auto line = format_chat_line(user, message);
    for (auto& m : recipients) m->receive(line);
    return recipients.size();
}

// --- Staffing fixture ---------------------------------------------------------

namespace demo {

namespace {

class Staff final : public StaffHandler {
public:
    Staff(std::string level, std::string reply) : level_(std::move(level)), reply_(std::move(reply)) {}
    bool accepts(const std::string& request) const override { return request == level_; }
    std::string answer(const std::string&) const override { return reply_; }
    std::string name() const override { return reply_; }

private:
    std::string level_;
    std::string reply_;
};

}  // namespace

std::shared_ptr<StaffHandler> make_staffing_chain() {
    return link_chain(std::vector<std::shared_ptr<StaffHandler>>{
        std::make_shared<Staff>("simple", "Junior staff handled the request."),
        std::make_shared<Staff>("moderate", "Manager handled the request."),
        std::make_shared<Staff>("complex", "Director handled the request."),
    });
}

}  // namespace demo

}  // namespace patternd
