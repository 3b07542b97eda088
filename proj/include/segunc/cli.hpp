#pragma once

namespace segunc::cli {

// Entry point behind the `segunc` binary. Exit codes: 0 ok, 2 input error,
// 3 geometry mismatch, 4 degenerate metric input.
int run(int argc, const char* const* argv);

}  // namespace segunc::cli
