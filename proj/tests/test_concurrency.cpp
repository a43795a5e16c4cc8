#include <doctest.h>

#include <atomic>
#include <set>

#include "patternd/concurrency.hpp"
#include "support/oracles.hpp"

using namespace patternd;
using namespace std::chrono_literals;

TEST_CASE("producer-consumer transcript") {
    BoundedQueue<std::string> q(5);
    std::vector<std::string> got;
    std::thread consumer([&] {
        for (int i = 0; i < 5; ++i) got.push_back(*q.get());
    });
    for (int i = 0; i < 5; ++i) q.put("Item " + std::to_string(i));
    consumer.join();
    CHECK(got == std::vector<std::string>{"Item 0", "Item 1", "Item 2", "Item 3", "Item 4"});
}

TEST_CASE("capacity one back-pressure") {
    BoundedQueue<int> q(1);
    q.put(1);
    CHECK_FALSE(q.try_put(2));
    std::atomic<bool> second_done{false};
    std::thread producer([&] {
        q.put(2);
        second_done = true;
    });
    std::this_thread::sleep_for(50ms);
    CHECK_FALSE(second_done.load());
    CHECK(q.get() == 1);
    producer.join();
    CHECK(second_done.load());
    CHECK(q.get() == 2);
}

TEST_CASE("queue timeouts, close and drain") {
    BoundedQueue<int> q(4);
    CHECK_THROWS_AS(BoundedQueue<int>(0), std::invalid_argument);
    CHECK_FALSE(q.get_for(10ms).has_value());
    CHECK_FALSE(q.try_get().has_value());
    q.put(1);
    q.put(2);
    q.close();
    CHECK(q.closed());
    CHECK_THROWS_AS(q.put(3), QueueClosed);
    // remaining items are still delivered after close
    CHECK(q.get() == 1);
    CHECK(q.get() == 2);
    CHECK_FALSE(q.get().has_value());
}

TEST_CASE("close wakes blocked consumers") {
    BoundedQueue<int> q(1);
    std::optional<int> got = 7;
    std::thread t([&] { got = q.get(); });
    std::this_thread::sleep_for(20ms);
    q.close();
    t.join();
    CHECK_FALSE(got.has_value());
}

TEST_CASE("priority queue orders by priority then arrival") {
    PriorityQueueExt<std::string> q(10);
    q.put(5, "e1");
    q.put(1, "a1");
    q.put(5, "e2");
    q.put(1, "a2");
    q.put(3, "c");
    std::vector<std::string> out;
    while (auto v = q.try_get()) out.push_back(*v);
    CHECK(out == std::vector<std::string>{"a1", "a2", "c", "e1", "e2"});
}

TEST_CASE("multi-producer multi-consumer conservation") {
    BoundedQueue<int> q(8);
    constexpr int kProducers = 4, kPer = 2500;
    std::vector<std::thread> ts;
    std::vector<std::vector<int>> got(3);
    for (int p = 0; p < kProducers; ++p) {
        ts.emplace_back([&, p] {
            for (int i = 0; i < kPer; ++i) q.put(p * kPer + i);
        });
    }
    for (std::size_t c = 0; c < got.size(); ++c) {
        ts.emplace_back([&, c] {
            while (auto v = q.get()) got[c].push_back(*v);
        });
    }
    for (int p = 0; p < kProducers; ++p) ts[static_cast<std::size_t>(p)].join();
    q.close();
    for (std::size_t i = kProducers; i < ts.size(); ++i) ts[i].join();
    std::multiset<int> all;
    for (auto& v : got) {
        // each producer's items stay in order within one consumer
        std::vector<int> last(kProducers, -1);
        for (int x : v) {
            CHECK(x > last[static_cast<std::size_t>(x / kPer)]);
            last[static_cast<std::size_t>(x / kPer)] = x;
        }
        all.insert(v.begin(), v.end());
    }
    CHECK(all.size() == kProducers * kPer);
    CHECK(std::set<int>(all.begin(), all.end()).size() == kProducers * kPer);
}

TEST_CASE("futures settle once with value or error") {
    ThreadPool pool(2, 8);
    auto f = pool.submit([] { return 21 * 2; });
    CHECK(f.result() == 42);
    CHECK(f.state() == FutureState::done);
    CHECK(f.result() == 42);

    auto bad = pool.submit([]() -> int { throw std::runtime_error("boom"); });
    CHECK_THROWS_WITH_AS(bad.result(), "boom", std::runtime_error);
    CHECK(bad.state() == FutureState::failed);

    auto v = pool.submit([] {});
    v.result();
    CHECK(v.state() == FutureState::done);
    CHECK(std::string(to_string(FutureState::cancelled)) == "cancelled");
}

TEST_CASE("result timeout leaves the future usable") {
    ThreadPool pool(1, 4);
    std::atomic<bool> release{false};
    auto f = pool.submit([&] {
        while (!release) std::this_thread::sleep_for(1ms);
        return 1;
    });
    CHECK_THROWS_AS(f.result(10ms), TimeoutError);
    release = true;
    CHECK(f.result(2000ms) == 1);
}

TEST_CASE("cancel only before pickup") {
    ThreadPool pool(1, 4);
    std::atomic<bool> release{false};
    std::atomic<int> ran{0};
    auto blocker = pool.submit([&] {
        while (!release) std::this_thread::sleep_for(1ms);
    });
    auto queued = pool.submit([&] { ++ran; });
    CHECK(queued.cancel());
    CHECK(queued.state() == FutureState::cancelled);
    CHECK_THROWS_AS(queued.result(), CancelledError);
    release = true;
    blocker.result();
    CHECK_FALSE(blocker.cancel());
    pool.shutdown();
    CHECK(ran == 0);
}

TEST_CASE("on_settled fires exactly once, including after settlement") {
    ThreadPool pool(2, 4);
    std::atomic<int> calls{0};
    auto f = pool.submit([] { return 3; });
    f.on_settled([&] { ++calls; });
    f.wait();
    f.on_settled([&] { ++calls; });
    pool.shutdown();
    CHECK(calls == 2);
}

TEST_CASE("thread pool concurrency and timing") {
    ThreadPool pool(3, 16);
    std::atomic<int> active{0}, peak{0};
    auto start = std::chrono::steady_clock::now();
    std::vector<TaskFuture<int>> fs;
    for (int i = 0; i < 5; ++i) {
        fs.push_back(pool.submit([&, i] {
            int now = ++active;
            int p = peak.load();
            while (now > p && !peak.compare_exchange_weak(p, now)) {
            }
            std::this_thread::sleep_for(50ms);
            --active;
            return i;
        }));
    }
    for (int i = 0; i < 5; ++i) CHECK(fs[static_cast<std::size_t>(i)].result() == i);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    CHECK(peak <= 3);
    CHECK(peak >= 2);
    CHECK(ms >= 100);
    CHECK(ms <= 300);
}

TEST_CASE("try_submit reports a full queue") {
    ThreadPool pool(1, 1);
    std::atomic<bool> release{false};
    auto running = pool.submit([&] {
        while (!release) std::this_thread::sleep_for(1ms);
    });
    // wait for the worker to pick the blocker up
    while (running.state() == FutureState::pending) std::this_thread::sleep_for(1ms);
    auto a = pool.try_submit([] { return 1; });
    CHECK(a.has_value());
    auto b = pool.try_submit([] { return 2; });
    CHECK_FALSE(b.has_value());
    release = true;
    CHECK(a->result() == 1);
}

TEST_CASE("shutdown modes") {
    SUBCASE("drain runs everything queued") {
        ThreadPool pool(1, 64);
        std::atomic<int> ran{0};
        for (int i = 0; i < 20; ++i) pool.submit([&] { ++ran; });
        pool.shutdown(ShutdownMode::drain);
        CHECK(ran == 20);
        CHECK(pool.state() == ThreadPool::State::terminated);
        CHECK_THROWS_AS(pool.submit([] {}), ShutdownError);
        pool.shutdown();
    }
    SUBCASE("now cancels what has not started") {
        ThreadPool pool(1, 64);
        std::atomic<bool> release{false};
        auto first = pool.submit([&] {
            while (!release) std::this_thread::sleep_for(1ms);
            return 1;
        });
        while (first.state() == FutureState::pending) std::this_thread::sleep_for(1ms);
        std::vector<TaskFuture<void>> rest;
        for (int i = 0; i < 10; ++i) rest.push_back(pool.submit([] {}));
        std::thread stopper([&] { pool.shutdown(ShutdownMode::now); });
        std::this_thread::sleep_for(20ms);
        release = true;
        stopper.join();
        CHECK(first.result() == 1);
        for (auto& f : rest) CHECK(f.state() == FutureState::cancelled);
    }
}

TEST_CASE("every submitted task settles exactly once under load") {
    auto g = oracle::rng(77);
    ThreadPool pool(4, 32);
    std::vector<TaskFuture<std::int64_t>> fs;
    std::vector<std::int64_t> expect;
    for (int i = 0; i < 2000; ++i) {
        auto x = oracle::uniform(g, -1000, 1000);
        expect.push_back(x * x);
        fs.push_back(pool.submit([x] { return x * x; }));
    }
    for (std::size_t i = 0; i < fs.size(); ++i) CHECK(fs[i].result() == expect[i]);
}
