#include "depthforge/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace depthforge {

namespace {

class ThreadPool {
public:
    explicit ThreadPool(int workers) {
        for (int i = 0; i < workers; ++i) {
            threads_.emplace_back([this] { worker_loop(); });
        }
    }

    ~ThreadPool() {
        {
            std::unique_lock lk(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    // Blocks until all chunks of the job have run.
    void run(size_t n, size_t chunks, const std::function<void(size_t, size_t)>& fn) {
        std::unique_lock lk(mu_);
        job_fn_ = &fn;
        job_n_ = n;
        job_chunks_ = chunks;
        next_chunk_ = 0;
        pending_ = chunks;
        ++generation_;
        cv_.notify_all();
        done_cv_.wait(lk, [this] { return pending_ == 0; });
        job_fn_ = nullptr;
    }

    int size() const { return static_cast<int>(threads_.size()); }

private:
    void worker_loop() {
        uint64_t seen = 0;
        while (true) {
            size_t chunk;
            const std::function<void(size_t, size_t)>* fn;
            size_t n, chunks;
            {
                std::unique_lock lk(mu_);
                cv_.wait(lk, [&] { return stop_ || (generation_ != seen && next_chunk_ < job_chunks_); });
                if (stop_) return;
                if (next_chunk_ >= job_chunks_) {
                    seen = generation_;
                    continue;
                }
                chunk = next_chunk_++;
                fn = job_fn_;
                n = job_n_;
                chunks = job_chunks_;
                if (next_chunk_ >= job_chunks_) seen = generation_;
            }
            const size_t per = (n + chunks - 1) / chunks;
            const size_t begin = chunk * per;
            const size_t end = std::min(n, begin + per);
            if (begin < end) (*fn)(begin, end);
            {
                std::unique_lock lk(mu_);
                if (--pending_ == 0) done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(size_t, size_t)>* job_fn_ = nullptr;
    size_t job_n_ = 0, job_chunks_ = 0, next_chunk_ = 0, pending_ = 0;
    uint64_t generation_ = 0;
    bool stop_ = false;
};

int g_jobs = 1;
ThreadPool* g_pool = nullptr;
int g_pool_size = 0;
std::mutex g_pool_mu;
thread_local bool t_in_worker = false;

ThreadPool* pool_for(int workers) {
    std::unique_lock lk(g_pool_mu);
    if (g_pool && g_pool_size != workers) {
        delete g_pool;
        g_pool = nullptr;
    }
    if (!g_pool) {
        g_pool = new ThreadPool(workers);
        g_pool_size = workers;
    }
    return g_pool;
}

}  // namespace

void set_jobs(int jobs) { g_jobs = jobs < 1 ? 1 : jobs; }

int jobs() { return g_jobs; }

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn) {
    if (n == 0) return;
    const int workers = g_jobs;
    if (workers <= 1 || n == 1 || t_in_worker) {
        fn(0, n);
        return;
    }
    const size_t chunks = std::min<size_t>(workers, n);
    // The first exception from any chunk is rethrown on the calling thread.
    std::exception_ptr err;
    std::mutex err_mu;
    auto wrapped = std::function<void(size_t, size_t)>([&](size_t b, size_t e) {
        t_in_worker = true;
        try {
            fn(b, e);
        } catch (...) {
            std::unique_lock lk(err_mu);
            if (!err) err = std::current_exception();
        }
        t_in_worker = false;
    });
    pool_for(workers)->run(n, chunks, wrapped);
    if (err) std::rethrow_exception(err);
}

void parallel_for_each(size_t n, const std::function<void(size_t)>& fn) {
    parallel_for(n, [&fn](size_t b, size_t e) {
        for (size_t i = b; i < e; ++i) fn(i);
    });
}

}  // namespace depthforge
