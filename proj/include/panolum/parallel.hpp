#pragma once

#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace panolum {

// Small shared worker pool. Work items are closures; parallel_for blocks
// until its chunks finish. All library call sites partition work into
// fixed-size chunks with disjoint outputs (or combine partials in chunk
// order), so results are bitwise independent of the worker count.
class ThreadPool {
 public:
  explicit ThreadPool(unsigned workers) {
    for (unsigned i = 0; i < workers; ++i)
      threads_.emplace_back([this] { run(); });
  }

  ~ThreadPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }

  unsigned size() const { return static_cast<unsigned>(threads_.size()); }

  void submit(std::function<void()> fn) {
    {
      std::lock_guard lock(mu_);
      queue_.push(std::move(fn));
    }
    cv_.notify_one();
  }

  static ThreadPool& global() {
    static ThreadPool pool(default_workers());
    return pool;
  }

  static unsigned default_workers() {
    if (const char* env = std::getenv("PANOLUM_THREADS")) {
      long n = std::strtol(env, nullptr, 10);
      if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
  }

  // True on pool worker threads; nested parallel_for calls run inline so a
  // worker never blocks waiting on tasks only it could serve.
  static bool& on_worker_thread() {
    thread_local bool flag = false;
    return flag;
  }

 private:
  void run() {
    on_worker_thread() = true;
    for (;;) {
      std::function<void()> fn;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return stop_ || !queue_.empty(); });
        if (stop_ && queue_.empty()) return;
        fn = std::move(queue_.front());
        queue_.pop();
      }
      fn();
    }
  }

  std::mutex mu_;
  std::condition_variable cv_;
  std::queue<std::function<void()>> queue_;
  std::vector<std::thread> threads_;
  bool stop_ = false;
};

// Runs fn(begin, end) over [0, n) split into chunks of at most `grain`.
// Runs inline when the pool has a single worker or the range is one chunk.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t grain, Fn&& fn) {
  if (n == 0) return;
  ThreadPool& pool = ThreadPool::global();
  if (grain == 0) grain = 1;
  std::size_t chunks = (n + grain - 1) / grain;
  if (pool.size() <= 1 || chunks <= 1 || ThreadPool::on_worker_thread()) {
    fn(std::size_t{0}, n);
    return;
  }
  std::mutex mu;
  std::condition_variable cv;
  std::size_t remaining = chunks;
  for (std::size_t c = 0; c < chunks; ++c) {
    std::size_t lo = c * grain;
    std::size_t hi = std::min(n, lo + grain);
    pool.submit([&, lo, hi] {
      fn(lo, hi);
      std::lock_guard lock(mu);
      if (--remaining == 0) cv.notify_one();
    });
  }
  std::unique_lock lock(mu);
  cv.wait(lock, [&] { return remaining == 0; });
}

}  // namespace panolum
