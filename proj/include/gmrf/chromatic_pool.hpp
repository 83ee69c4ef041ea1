#pragma once

#include <barrier>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace gmrf {

/// Fixed set of worker threads that execute one contiguous chunk each of a
/// range, then meet at a barrier. The calling thread acts as worker 0.
class ChromaticPool {
public:
    using Task = std::function<void(std::size_t begin, std::size_t end)>;

    explicit ChromaticPool(std::size_t workers)
        : workers_(workers == 0 ? 1 : workers), start_(static_cast<std::ptrdiff_t>(workers_)),
          done_(static_cast<std::ptrdiff_t>(workers_)) {
        threads_.reserve(workers_ - 1);
        for (std::size_t w = 1; w < workers_; ++w) {
            threads_.emplace_back([this, w] { worker_loop(w); });
        }
    }

    ChromaticPool(const ChromaticPool&) = delete;
    ChromaticPool& operator=(const ChromaticPool&) = delete;

    ~ChromaticPool() {
        stop_ = true;
        start_.arrive_and_wait();
        for (auto& t : threads_) t.join();
    }

    std::size_t workers() const noexcept { return workers_; }

    /// Runs task over [0, count) split across the workers; returns when all are done.
    void parallel_for(std::size_t count, const Task& task) {
        if (workers_ == 1) {
            task(0, count);
            return;
        }
        task_ = &task;
        count_ = count;
        error_ = nullptr;
        start_.arrive_and_wait();
        run_chunk(0);
        done_.arrive_and_wait();
        task_ = nullptr;
        if (error_) std::rethrow_exception(error_);
    }

private:
    void worker_loop(std::size_t w) {
        for (;;) {
            start_.arrive_and_wait();
            if (stop_) return;
            run_chunk(w);
            done_.arrive_and_wait();
        }
    }

    void run_chunk(std::size_t w) {
        const std::size_t begin = count_ * w / workers_;
        const std::size_t end = count_ * (w + 1) / workers_;
        if (begin == end) return;
        try {
            (*task_)(begin, end);
        } catch (...) {
            std::lock_guard lock(error_mutex_);
            if (!error_) error_ = std::current_exception();
        }
    }

    std::size_t workers_;
    std::barrier<> start_;
    std::barrier<> done_;
    std::vector<std::thread> threads_;
    const Task* task_ = nullptr;
    std::size_t count_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
    std::mutex error_mutex_;
};

}  // namespace gmrf
