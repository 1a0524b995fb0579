#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace sdae {

// Persistent fork-join pool. Training loops issue many small kernels per
// example, so dispatch has to be cheap: one generation bump + notify_all,
// no per-call allocation. The calling thread executes worker 0. With
// size()==1 everything runs inline and no worker threads exist.
class ThreadPool {
public:
    explicit ThreadPool(unsigned threads)
        : size_(threads < 1 ? 1u : threads) {
        workers_.reserve(size_ - 1);
        for (unsigned i = 1; i < size_; ++i)
            workers_.emplace_back([this, i] { worker_loop(i); });
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    ~ThreadPool() {
        if (size_ > 1) {
            {
                std::lock_guard<std::mutex> lk(m_);
                stop_ = true;
                ++generation_;
            }
            cv_.notify_all();
        }
        for (auto& t : workers_) t.join();
    }

    unsigned size() const { return size_; }

    static unsigned hardware_threads() {
        unsigned n = std::thread::hardware_concurrency();
        return n ? n : 1u;
    }

    // Runs f(worker) for worker in [0, size()); returns when all are done.
    template <class F>
    void run(F&& f) {
        if (size_ == 1) {
            f(0u);
            return;
        }
        using Fn = std::remove_reference_t<F>;
        dispatch([](void* ctx, unsigned w) { (*static_cast<Fn*>(ctx))(w); },
                 std::addressof(f));
    }

private:
    void dispatch(void (*fn)(void*, unsigned), void* ctx) {
        {
            std::lock_guard<std::mutex> lk(m_);
            fn_ = fn;
            ctx_ = ctx;
            pending_ = size_ - 1;
            ++generation_;
        }
        cv_.notify_all();
        fn(ctx, 0);
        std::unique_lock<std::mutex> lk(m_);
        done_cv_.wait(lk, [this] { return pending_ == 0; });
    }

    void worker_loop(unsigned index) {
        std::uint64_t seen = 0;
        for (;;) {
            void (*fn)(void*, unsigned);
            void* ctx;
            {
                std::unique_lock<std::mutex> lk(m_);
                cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
                fn = fn_;
                ctx = ctx_;
            }
            fn(ctx, index);
            {
                std::lock_guard<std::mutex> lk(m_);
                if (--pending_ == 0) done_cv_.notify_one();
            }
        }
    }

    unsigned size_;
    std::vector<std::thread> workers_;
    std::mutex m_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    void (*fn_)(void*, unsigned) = nullptr;
    void* ctx_ = nullptr;
    unsigned pending_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

// Splits [0, n) into size() contiguous chunks, one per worker. Chunk
// boundaries depend only on n and size(), and every output index is owned
// by exactly one worker, so kernels built on this are bitwise-reproducible
// at any thread count.
template <class F>
void parallel_chunks(ThreadPool& pool, std::size_t n, F&& body) {
    const unsigned t = pool.size();
    if (t == 1 || n < t) {
        if (n > 0) body(std::size_t{0}, n);
        return;
    }
    pool.run([&](unsigned w) {
        const std::size_t begin = n * w / t;
        const std::size_t end = n * (w + 1) / t;
        if (begin < end) body(begin, end);
    });
}

}  // namespace sdae
