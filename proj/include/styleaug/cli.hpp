#pragma once

#include <iosfwd>

namespace styleaug {

// Entry point shared by the binary and the tests. Streams are injectable so
// interactive sessions can be scripted. Exit codes: 0 success, 1 pipeline or
// validation failure, 2 I/O, usage or configuration failure.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace styleaug
