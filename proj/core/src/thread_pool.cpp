#include "ragz/thread_pool.hpp"

namespace ragz {

ThreadPool::ThreadPool(std::size_t threads)
{
    if (threads == 0) {
        threads = 1;
    }
    workers_.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) {
        workers_.emplace_back([this] { work(); });
    }
}

ThreadPool::~ThreadPool()
{
    std::deque<std::function<void()>> dropped_high;
    std::deque<std::function<void()>> dropped_normal;
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
        dropped_high.swap(high_);
        dropped_normal.swap(normal_);
    }
    wake_.notify_all();
    for (auto& worker : workers_) {
        worker.join();
    }
}

void ThreadPool::work()
{
    while (true) {
        std::function<void()> job;
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [this] { return stopping_ || !high_.empty() || !normal_.empty(); });
            if (stopping_) {
                return;
            }
            auto& queue = high_.empty() ? normal_ : high_;
            job = std::move(queue.front());
            queue.pop_front();
        }
        job();
    }
}

}  // namespace ragz
