#pragma once

namespace ngdc {

// Worker-pool size for all OpenMP regions. 0 restores the hardware default.
// Outputs are identical for any worker count: parallel loops write disjoint
// preallocated slots and every reduction is an ordered serial merge.
void set_worker_count(int n);
int worker_count();

}  // namespace ngdc
