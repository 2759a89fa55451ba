#pragma once

#include <cstddef>
#include <functional>

namespace bbgan {

// 0 means "one per logical core".
unsigned resolve_workers(unsigned requested);

// Runs body(i) for i in [0, n) on up to `workers` threads. Indices are
// claimed dynamically; callers write results into slot i so the outcome never
// depends on scheduling. The first exception (lowest index) is rethrown
// after all workers stop; remaining indices are skipped once one fails.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace bbgan
