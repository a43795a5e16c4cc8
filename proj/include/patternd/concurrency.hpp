#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace patternd {

class ShutdownError : public std::runtime_error {
public:
    ShutdownError() : std::runtime_error("thread pool is shut down") {}
};

class TimeoutError : public std::runtime_error {
public:
    TimeoutError() : std::runtime_error("timed out waiting for result") {}
};

class CancelledError : public std::runtime_error {
public:
    CancelledError() : std::runtime_error("task was cancelled") {}
};

class QueueClosed : public std::runtime_error {
public:
    QueueClosed() : std::runtime_error("queue is closed") {}
};

// ---------------------------------------------------------------------------
// Producer-consumer queues
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
class FifoBuffer {
public:
    using value_type = T;

    void push(T item) { items_.push_back(std::move(item)); }
    T pop() {
        T item = std::move(items_.front());
        items_.pop_front();
        return item;
    }
    std::size_t size() const noexcept { return items_.size(); }

private:
    std::deque<T> items_;
};

// Ordered by (priority, arrival); lower priority values come out first.
template <class T>
class PriorityBuffer {
public:
    using value_type = T;

    void push(std::int64_t priority, T item) {
        heap_.push_back({priority, next_seq_++, std::move(item)});
        std::push_heap(heap_.begin(), heap_.end(), later);
    }
    T pop() {
        std::pop_heap(heap_.begin(), heap_.end(), later);
        T item = std::move(heap_.back().item);
        heap_.pop_back();
        return item;
    }
    std::size_t size() const noexcept { return heap_.size(); }

private:
    struct Entry {
        std::int64_t priority;
        std::uint64_t seq;
        T item;
    };
    static bool later(const Entry& a, const Entry& b) {
        return a.priority != b.priority ? a.priority > b.priority : a.seq > b.seq;
    }

    std::vector<Entry> heap_;
    std::uint64_t next_seq_ = 0;
};

/// Blocking bounded buffer. `put` waits while full, `get` waits while empty
/// and open. Once closed, puts throw and gets drain what is left, then
/// report closed (nullopt) forever.
template <class Buffer>
class BlockingQueue {
public:
    using value_type = typename Buffer::value_type;

    explicit BlockingQueue(std::size_t capacity) : capacity_(capacity) {
        if (capacity_ == 0) throw std::invalid_argument("queue capacity must be >= 1");
    }

    BlockingQueue(const BlockingQueue&) = delete;
    BlockingQueue& operator=(const BlockingQueue&) = delete;

    template <class... Args>
    void put(Args&&... args) {
        std::unique_lock lock(mu_);
        not_full_.wait(lock, [&] { return closed_ || buffer_.size() < capacity_; });
        if (closed_) throw QueueClosed();
        buffer_.push(std::forward<Args>(args)...);
        lock.unlock();
        not_empty_.notify_one();
    }

    /// Non-blocking put; false when full. Throws QueueClosed when closed.
    template <class... Args>
    bool try_put(Args&&... args) {
        std::unique_lock lock(mu_);
        if (closed_) throw QueueClosed();
        if (buffer_.size() >= capacity_) return false;
        buffer_.push(std::forward<Args>(args)...);
        lock.unlock();
        not_empty_.notify_one();
        return true;
    }

    std::optional<value_type> get() {
        std::unique_lock lock(mu_);
        not_empty_.wait(lock, [&] { return closed_ || buffer_.size() > 0; });
        return pop_locked(lock);
    }

    /// nullopt on timeout as well as on closed-and-drained; see closed().
    template <class Rep, class Period>
    std::optional<value_type> get_for(std::chrono::duration<Rep, Period> timeout) {
        std::unique_lock lock(mu_);
        if (!not_empty_.wait_for(lock, timeout, [&] { return closed_ || buffer_.size() > 0; })) {
            return std::nullopt;
        }
        return pop_locked(lock);
    }

    std::optional<value_type> try_get() {
        std::unique_lock lock(mu_);
        return pop_locked(lock);
    }

    void close() {
        {
            std::lock_guard lock(mu_);
            closed_ = true;
        }
        not_empty_.notify_all();
        not_full_.notify_all();
    }

    /// Closes the queue and hands back everything still buffered.
    std::vector<value_type> close_and_drain() {
        std::vector<value_type> rest;
        {
            std::lock_guard lock(mu_);
            closed_ = true;
            while (buffer_.size() > 0) rest.push_back(buffer_.pop());
        }
        not_empty_.notify_all();
        not_full_.notify_all();
        return rest;
    }

    bool closed() const {
        std::lock_guard lock(mu_);
        return closed_;
    }
    std::size_t size() const {
        std::lock_guard lock(mu_);
        return buffer_.size();
    }
    std::size_t capacity() const noexcept { return capacity_; }

private:
    std::optional<value_type> pop_locked(std::unique_lock<std::mutex>& lock) {
        if (buffer_.size() == 0) return std::nullopt;
        std::optional<value_type> item(buffer_.pop());
        lock.unlock();
        not_full_.notify_one();
        return item;
    }

    const std::size_t capacity_;
    mutable std::mutex mu_;
    std::condition_variable not_empty_;
    std::condition_variable not_full_;
    Buffer buffer_;
    bool closed_ = false;
};

}  // namespace detail

template <class T>
using BoundedQueue = detail::BlockingQueue<detail::FifoBuffer<T>>;

/// put(priority, item); get returns the lowest priority value first, ties in
/// arrival order.
template <class T>
using PriorityQueueExt = detail::BlockingQueue<detail::PriorityBuffer<T>>;

// ---------------------------------------------------------------------------
// Futures
// ---------------------------------------------------------------------------

enum class FutureState { pending, running, done, failed, cancelled };

const char* to_string(FutureState state);

namespace detail {

class TaskStateBase {
public:
    virtual ~TaskStateBase() = default;

    // Worker entry point. Runs the body only if still pending.
    void run();
    bool cancel();

    FutureState state() const;
    void wait() const;
    bool wait_for(std::chrono::nanoseconds timeout) const;
    void on_settled(std::function<void()> callback);

protected:
    virtual void execute() = 0;

    // Caller holds mu_. Throws for failed/cancelled.
    void check_settled_ok() const;

    mutable std::mutex mu_;
    mutable std::condition_variable settled_cv_;
    FutureState state_ = FutureState::pending;
    std::exception_ptr error_;

private:
    void settle(FutureState final_state, std::exception_ptr error);

    std::vector<std::function<void()>> callbacks_;
};

template <class T>
class TaskState final : public TaskStateBase {
public:
    using Stored = std::conditional_t<std::is_void_v<T>, std::monostate, T>;

    explicit TaskState(std::function<T()> body) : body_(std::move(body)) {}

    Stored result(std::optional<std::chrono::nanoseconds> timeout) const {
        std::unique_lock lock(mu_);
        auto settled = [&] {
            return state_ == FutureState::done || state_ == FutureState::failed ||
                   state_ == FutureState::cancelled;
        };
        if (timeout) {
            if (!settled_cv_.wait_for(lock, *timeout, settled)) throw TimeoutError();
        } else {
            settled_cv_.wait(lock, settled);
        }
        check_settled_ok();
        return *value_;
    }

private:
    void execute() override {
        if constexpr (std::is_void_v<T>) {
            body_();
            value_.emplace();
        } else {
            value_.emplace(body_());
        }
        body_ = nullptr;
    }

    std::function<T()> body_;
    std::optional<Stored> value_;
};

}  // namespace detail

/// Write-once placeholder for a task's result.
template <class T>
class TaskFuture {
public:
    TaskFuture() = default;
    explicit TaskFuture(std::shared_ptr<detail::TaskState<T>> state) : state_(std::move(state)) {}

    bool valid() const noexcept { return static_cast<bool>(state_); }
    FutureState state() const { return state_->state(); }

    /// Blocks until settled, or until `timeout` if given. A timeout throws
    /// TimeoutError and leaves the future untouched.
    T result(std::optional<std::chrono::nanoseconds> timeout = std::nullopt) const {
        if constexpr (std::is_void_v<T>) {
            state_->result(timeout);
        } else {
            return state_->result(timeout);
        }
    }

    /// True iff the task had not been picked up yet. A cancelled task never runs.
    bool cancel() { return state_->cancel(); }

    void wait() const { state_->wait(); }
    bool wait_for(std::chrono::nanoseconds timeout) const { return state_->wait_for(timeout); }

    /// Runs `callback` once the future settles, on the settling thread (or
    /// immediately on the caller's thread if it already has).
    void on_settled(std::function<void()> callback) { state_->on_settled(std::move(callback)); }

private:
    std::shared_ptr<detail::TaskState<T>> state_;
};

template <class F>
auto make_task(F&& f) {
    using R = std::invoke_result_t<std::decay_t<F>>;
    auto state = std::make_shared<detail::TaskState<R>>(std::function<R()>(std::forward<F>(f)));
    return std::make_pair(TaskFuture<R>(state), std::shared_ptr<detail::TaskStateBase>(state));
}

// ---------------------------------------------------------------------------
// Thread pool / executor
// ---------------------------------------------------------------------------

enum class ShutdownMode { drain, now };

class ThreadPool {
public:
    enum class State { running, shutting_down, terminated };

    ThreadPool(std::size_t workers, std::size_t queue_capacity);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    /// Enqueues `task`, blocking while the queue is full.
    template <class F>
    auto submit(F&& task) {
        auto [future, job] = make_task(std::forward<F>(task));
        try {
            queue_.put(std::move(job));
        } catch (const QueueClosed&) {
            throw ShutdownError();
        }
        return future;
    }

    /// Like submit, but returns nullopt instead of blocking when the queue is full.
    template <class F>
    auto try_submit(F&& task) -> std::optional<decltype(make_task(std::forward<F>(task)).first)> {
        auto [future, job] = make_task(std::forward<F>(task));
        try {
            if (!queue_.try_put(std::move(job))) return std::nullopt;
        } catch (const QueueClosed&) {
            throw ShutdownError();
        }
        return future;
    }

    /// drain: run everything queued, then stop. now: cancel queued tasks, let
    /// running ones finish, then stop. Idempotent.
    void shutdown(ShutdownMode mode = ShutdownMode::drain);

    State state() const;
    std::size_t worker_count() const noexcept { return worker_count_; }
    std::size_t queued() const { return queue_.size(); }

private:
    void worker_loop();

    const std::size_t worker_count_;
    BoundedQueue<std::shared_ptr<detail::TaskStateBase>> queue_;
    std::vector<std::thread> workers_;
    std::mutex shutdown_mu_;
    std::atomic<State> state_{State::running};
};

}  // namespace patternd
