#include "patternd/concurrency.hpp"

namespace patternd {

const char* to_string(FutureState state) {
    switch (state) {
        case FutureState::pending:
            return "pending";
        case FutureState::running:
            return "running";
        case FutureState::done:
            return "done";
        case FutureState::failed:
            return "failed";
        case FutureState::cancelled:
            return "cancelled";
    }
    return "pending";
}

namespace detail {

void TaskStateBase::run() {
    {
        std::lock_guard lock(mu_);
        if (state_ != FutureState::pending) return;
        state_ = FutureState::running;
    }
    try {
        execute();
    } catch (...) {
        settle(FutureState::failed, std::current_exception());
        return;
    }
    settle(FutureState::done, nullptr);
}

bool TaskStateBase::cancel() {
    {
        std::lock_guard lock(mu_);
        if (state_ != FutureState::pending) return false;
    }
    settle(FutureState::cancelled, std::make_exception_ptr(CancelledError()));
    return true;
}

void TaskStateBase::settle(FutureState final_state, std::exception_ptr error) {
    std::vector<std::function<void()>> callbacks;
    {
        std::lock_guard lock(mu_);
        // A concurrent cancel may have won the pending -> cancelled race.
        if (final_state == FutureState::cancelled && state_ != FutureState::pending) return;
        state_ = final_state;
        error_ = std::move(error);
        callbacks.swap(callbacks_);
    }
    settled_cv_.notify_all();
    for (auto& cb : callbacks) cb();
}

FutureState TaskStateBase::state() const {
    std::lock_guard lock(mu_);
    return state_;
}

static bool is_settled(FutureState s) {
    return s == FutureState::done || s == FutureState::failed || s == FutureState::cancelled;
}

void TaskStateBase::wait() const {
    std::unique_lock lock(mu_);
    settled_cv_.wait(lock, [&] { return is_settled(state_); });
}

bool TaskStateBase::wait_for(std::chrono::nanoseconds timeout) const {
    std::unique_lock lock(mu_);
    return settled_cv_.wait_for(lock, timeout, [&] { return is_settled(state_); });
}

void TaskStateBase::on_settled(std::function<void()> callback) {
    {
        std::lock_guard lock(mu_);
        if (!is_settled(state_)) {
            callbacks_.push_back(std::move(callback));
            return;
        }
    }
    callback();
}

void TaskStateBase::check_settled_ok() const {
    if (state_ == FutureState::failed || state_ == FutureState::cancelled) {
        std::rethrow_exception(error_);
    }
}

}  // namespace detail

ThreadPool::ThreadPool(std::size_t workers, std::size_t queue_capacity)
    : worker_count_(workers), queue_(queue_capacity) {
    if (workers == 0) throw std::invalid_argument("thread pool needs at least one worker");
    workers_.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) workers_.emplace_back(&ThreadPool::worker_loop, this);
}

ThreadPool::~ThreadPool() { shutdown(ShutdownMode::drain); }

void ThreadPool::worker_loop() {
    while (auto job = queue_.get()) (*job)->run();
}

void ThreadPool::shutdown(ShutdownMode mode) {
    std::lock_guard lock(shutdown_mu_);
    if (state_ != State::running) return;
    state_ = State::shutting_down;
    if (mode == ShutdownMode::now) {
        for (auto& job : queue_.close_and_drain()) job->cancel();
    } else {
        queue_.close();
    }
    for (auto& t : workers_) {
        if (t.joinable()) t.join();
    }
    state_ = State::terminated;
}

ThreadPool::State ThreadPool::state() const { return state_.load(); }

}  // namespace patternd
