#pragma once

namespace segunc {

// Worker count for parallel kernels. SEGUNC_THREADS caps it when set;
// otherwise the OpenMP default is used. Always >= 1.
int worker_count();

}  // namespace segunc
