#include "ragz/prefetch_strategy.hpp"

#include <algorithm>

namespace ragz {

PrefetchStrategy::PrefetchStrategy(std::size_t max_degree) : max_degree_(max_degree) {}

std::vector<std::uint64_t> PrefetchStrategy::plan(std::uint64_t accessed)
{
    if (!last_) {
        degree_ = max_degree_;
        last_was_sequential_ = true;
    } else if (accessed == *last_) {
        // Repeated access to the same chunk: keep the current degree.
    } else if (accessed == *last_ + 1) {
        degree_ = last_was_sequential_ ? std::min(max_degree_, std::max<std::size_t>(1, degree_ * 2)) : 1;
        degree_ = std::min(degree_, max_degree_);
        last_was_sequential_ = true;
    } else {
        degree_ /= 2;
        last_was_sequential_ = false;
    }
    last_ = accessed;

    std::vector<std::uint64_t> ordinals;
    ordinals.reserve(degree_);
    for (std::size_t i = 1; i <= degree_; ++i) {
        ordinals.push_back(accessed + i);
    }
    return ordinals;
}

}  // namespace ragz
