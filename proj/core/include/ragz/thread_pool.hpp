#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace ragz {

/// Fixed set of workers with two FIFO queues; high-priority work is taken
/// first. Queued tasks that never ran are dropped on destruction, which
/// leaves their futures with a broken promise.
class ThreadPool {
public:
    enum class Priority { High, Normal };

    explicit ThreadPool(std::size_t threads);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    std::size_t size() const noexcept { return workers_.size(); }

    template <typename F>
    auto submit(F&& function, Priority priority = Priority::Normal) -> std::future<std::invoke_result_t<F>>
    {
        using Result = std::invoke_result_t<F>;
        auto task = std::make_shared<std::packaged_task<Result()>>(std::forward<F>(function));
        auto future = task->get_future();
        {
            std::lock_guard lock(mutex_);
            auto& queue = priority == Priority::High ? high_ : normal_;
            queue.emplace_back([task] { (*task)(); });
        }
        wake_.notify_one();
        return future;
    }

private:
    void work();

    std::mutex mutex_;
    std::condition_variable wake_;
    std::deque<std::function<void()>> high_;
    std::deque<std::function<void()>> normal_;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

}  // namespace ragz
