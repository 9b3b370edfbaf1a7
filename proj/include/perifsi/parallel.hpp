#ifndef PERIFSI_PARALLEL_HPP
#define PERIFSI_PARALLEL_HPP

#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace perifsi {

// Static-partition worker pool. Work item i covers the half-open index range
// [chunk_begin(i,n), chunk_begin(i+1,n)); partitions depend only on the worker
// count, so any accumulate-then-merge scheme that merges per-worker buffers in
// worker order is bitwise reproducible at a fixed worker count.
class WorkerPool {
public:
  explicit WorkerPool(int workers = env_worker_count()) {
    workers_ = workers < 1 ? 1 : workers;
    for (int w = 1; w < workers_; ++w)
      threads_.emplace_back([this, w] { worker_loop(w); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::unique_lock lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int workers() const { return workers_; }

  std::size_t chunk_begin(int worker, std::size_t n) const {
    return n * static_cast<std::size_t>(worker) / static_cast<std::size_t>(workers_);
  }

  // fn(worker, begin, end): process items in [begin, end). Blocks until all
  // workers finish. Worker 0 runs on the calling thread.
  void for_chunks(std::size_t n, const std::function<void(int, std::size_t, std::size_t)>& fn) {
    if (workers_ == 1 || n == 0) {
      fn(0, 0, n);
      return;
    }
    {
      std::unique_lock lk(mu_);
      job_ = &fn;
      job_n_ = n;
      ++generation_;
      pending_ = workers_ - 1;
    }
    cv_.notify_all();
    fn(0, chunk_begin(0, n), chunk_begin(1, n));
    std::unique_lock lk(mu_);
    done_cv_.wait(lk, [this] { return pending_ == 0; });
    job_ = nullptr;
  }

  // Worker count from PERIFSI_WORKERS; defaults to the hardware concurrency.
  static int env_worker_count() {
    if (const char* s = std::getenv("PERIFSI_WORKERS")) {
      int v = std::atoi(s);
      if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }

private:
  void worker_loop(int w) {
    std::uint64_t seen = 0;
    for (;;) {
      const std::function<void(int, std::size_t, std::size_t)>* job = nullptr;
      std::size_t n = 0;
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
        job = job_;
        n = job_n_;
      }
      (*job)(w, chunk_begin(w, n), chunk_begin(w + 1, n));
      {
        std::unique_lock lk(mu_);
        if (--pending_ == 0) done_cv_.notify_all();
      }
    }
  }

  int workers_ = 1;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_, done_cv_;
  const std::function<void(int, std::size_t, std::size_t)>* job_ = nullptr;
  std::size_t job_n_ = 0;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool stop_ = false;
};

}  // namespace perifsi

#endif
