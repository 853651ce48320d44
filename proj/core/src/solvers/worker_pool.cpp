#include "igashape/solvers/worker_pool.hpp"

#include <cstdlib>
#include <string>

namespace igashape {

WorkerPool::WorkerPool(int workers) : workers_(workers < 1 ? 1 : workers) {
    for (int i = 1; i < workers_; ++i) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
}

void WorkerPool::run_tasks() {
    for (;;) {
        const std::function<void(int)>* job = nullptr;
        int i = 0;
        {
            std::lock_guard lock(mutex_);
            if (job_ == nullptr || next_ >= n_tasks_) return;
            job = job_;
            i = next_++;
        }
        try {
            (*job)(i);
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_) error_ = std::current_exception();
        }
        {
            std::lock_guard lock(mutex_);
            ++finished_;
            if (finished_ == n_tasks_) done_.notify_all();
        }
    }
}

void WorkerPool::worker_loop() {
    unsigned seen = 0;
    for (;;) {
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            ++active_;
        }
        run_tasks();
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        done_.notify_all();
    }
}

void WorkerPool::parallel_for(int n, const std::function<void(int)>& f) {
    if (n <= 0) return;
    if (workers_ == 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    {
        std::lock_guard lock(mutex_);
        job_ = &f;
        n_tasks_ = n;
        next_ = 0;
        finished_ = 0;
        error_ = nullptr;
        ++generation_;
    }
    wake_.notify_all();
    run_tasks();
    std::exception_ptr err;
    {
        std::unique_lock lock(mutex_);
        done_.wait(lock, [&] { return finished_ == n_tasks_ && active_ == 0; });
        job_ = nullptr;
        err = error_;
        error_ = nullptr;
    }
    if (err) std::rethrow_exception(err);
}

int resolve_worker_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("IGA_SHAPEOPT_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (...) {
        }
    }
    return 1;
}

}  // namespace igashape
