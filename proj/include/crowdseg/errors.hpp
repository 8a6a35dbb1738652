#pragma once

#include <stdexcept>
#include <string>

namespace crowdseg {

// File/stream level failure: missing file, short read, bad magic.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Semantically invalid data: bad dimensions, out-of-range values, broken preconditions.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
[[noreturn]] void check_failed(const char* expr, const char* file, int line);
}

// Internal invariant check that stays on in release builds.
#define CSEG_CHECK(cond) \
    do { \
        if (!(cond)) ::crowdseg::detail::check_failed(#cond, __FILE__, __LINE__); \
    } while (0)

}  // namespace crowdseg
