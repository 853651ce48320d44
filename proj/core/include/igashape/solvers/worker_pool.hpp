#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace igashape {

/// Fixed set of threads running index-parallel loops. The calling thread
/// takes part, so a pool of size 1 runs everything inline.
class WorkerPool {
public:
    explicit WorkerPool(int workers = 1);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    int size() const noexcept { return workers_; }

    /// Runs f(i) for i in [0, n). Tasks are claimed dynamically; the first
    /// exception thrown by a task is rethrown after all tasks finished.
    void parallel_for(int n, const std::function<void(int)>& f);

private:
    void worker_loop();
    void run_tasks();

    int workers_ = 1;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(int)>* job_ = nullptr;
    int n_tasks_ = 0;
    int next_ = 0;
    int finished_ = 0;
    int active_ = 0;
    unsigned generation_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
};

/// Workers from a requested count; <= 0 falls back to IGA_SHAPEOPT_THREADS,
/// then to 1.
int resolve_worker_count(int requested);

}  // namespace igashape
