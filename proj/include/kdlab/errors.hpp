#pragma once

#include <stdexcept>
#include <string>

namespace kdlab {

// Exit-code mapping used by the CLI: ConfigError -> 2, DataError -> 3,
// NumericError -> 4. ShapeError is a configuration problem and maps to 2.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : ConfigError {
    using ConfigError::ConfigError;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace kdlab
