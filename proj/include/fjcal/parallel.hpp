#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace fjcal {

/// How independent replicate loops are executed. `Serial` is the reference
/// path; `Parallel` must produce bitwise-identical results.
enum class Execution { Serial, Parallel };

/// Runs body(i) for i in [0, n). Every iteration writes only to its own slot,
/// so the result does not depend on scheduling. The first exception (lowest
/// index) is rethrown after the loop.
template <typename Body>
void for_each_index(std::size_t n, Execution exec, Body&& body) {
    if (exec == Execution::Serial || n < 2 || omp_in_parallel()) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Maps fn over [0, n) into a vector, preserving index order.
template <typename T, typename Fn>
std::vector<T> map_indices(std::size_t n, Execution exec, Fn&& fn) {
    std::vector<T> out(n);
    for_each_index(n, exec, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

}  // namespace fjcal
