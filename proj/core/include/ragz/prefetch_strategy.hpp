#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace ragz {

/// Decides how many chunks after an accessed chunk ordinal to prefetch.
///
/// The first access prefetches the full degree. Re-accessing the same
/// ordinal keeps the degree. A non-sequential access halves it, so isolated
/// random accesses decay to no prefetching. The first sequential access after
/// a non-sequential one restarts at 1 and each further one doubles it, up to
/// the maximum.
class PrefetchStrategy {
public:
    explicit PrefetchStrategy(std::size_t max_degree);

    /// Records an access and returns the ordinals to prefetch, nearest first.
    std::vector<std::uint64_t> plan(std::uint64_t accessed);

    std::size_t degree() const noexcept { return degree_; }
    std::size_t max_degree() const noexcept { return max_degree_; }

private:
    std::size_t max_degree_;
    std::size_t degree_ = 0;
    std::optional<std::uint64_t> last_;
    bool last_was_sequential_ = true;
};

}  // namespace ragz
