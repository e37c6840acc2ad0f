#pragma once

// Every data-parallel kernel in the library takes an Execution argument.
// `serial` is the reference path kept for testing; `parallel` distributes the
// same per-item work over OpenMP threads. Per-item work never shares mutable
// state or random streams, so both paths produce bit-identical results.

namespace driftbench {

enum class Execution { serial, parallel };

/// Thread count used by parallel kernels (0 = OpenMP default).
void set_num_threads(int n);
int num_threads();

}  // namespace driftbench
