#pragma once

#include <stdexcept>
#include <string>

namespace sdae {

// Error taxonomy mirrored by the CLI exit codes: usage/config -> 2,
// data/contract -> 3, I/O -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct DimensionError : DataError {
    using DataError::DataError;
};

struct IoError : Error {
    using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw DimensionError(msg);
}

}  // namespace sdae
