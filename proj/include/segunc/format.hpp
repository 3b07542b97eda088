#pragma once

#include <string>

namespace segunc {

// Fixed 9-significant-digit formatting used by every report writer so CSV and
// JSON output diff byte-stable.
std::string format_g9(double value);

}  // namespace segunc
