#pragma once

#include <cstddef>
#include <functional>

namespace mgle {

/// Worker count used by sample- and row-parallel loops. Defaults to 1.
void set_threads(unsigned n);
unsigned threads() noexcept;

/// Runs body(i) for i in [0, n) on up to threads() workers, rethrowing the first exception.
/// Work is split into contiguous chunks; callers that reduce must do so in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mgle
