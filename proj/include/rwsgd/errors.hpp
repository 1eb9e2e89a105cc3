// errors.hpp — exception types shared by the library and the CLI.
#pragma once
#include <stdexcept>
#include <string>

namespace rwsgd {

// Invalid parameters, malformed input files, missing options.
// The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical procedure failed to converge or produced an inconsistent
// result (disconnected graph after all retries, non-mixing chain, ...).
// The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}
}  // namespace detail

}  // namespace rwsgd
