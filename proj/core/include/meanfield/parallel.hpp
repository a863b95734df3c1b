#pragma once

namespace mf {

/// Number of worker threads used by grid and tensor loops. 0 restores the
/// runtime default. Every parallel loop in the library partitions work into
/// fixed-size chunks, so results are bitwise identical for any thread count.
void set_thread_count(int threads);
int thread_count();
int max_thread_count();

}  // namespace mf
