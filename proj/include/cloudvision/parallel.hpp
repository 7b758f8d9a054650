#pragma once

namespace cloudvision {

/// Caps OpenMP parallelism from CLOUDVISION_THREADS when it holds a positive
/// integer. Returns the thread count in effect.
int configure_threads_from_env();

/// Thread count for subsequent parallel regions (n >= 1).
void set_thread_count(int n);
int thread_count();

}  // namespace cloudvision
