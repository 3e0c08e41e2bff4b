#pragma once

#include <string>

namespace padnet {

// Shortest round-trip decimal form; reports rely on it being stable.
std::string format_real(double value);

}  // namespace padnet
