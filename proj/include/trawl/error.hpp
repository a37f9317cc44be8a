#pragma once

#include <stdexcept>
#include <string>

namespace trawl {

/// Bad input data (malformed files, empty paths, unusable records).
class DataError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a representable or converged value.
class NumericalError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
    if (!condition)
        throw std::invalid_argument(message);
}

} // namespace detail
} // namespace trawl
