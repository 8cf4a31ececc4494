#pragma once

#include <iosfwd>

namespace cvlab {

/// Exit codes: 0 success, 1 invalid profile or model, 2 unreadable input or
/// bad usage, 3 quadrature failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cvlab
