#pragma once

#include <stdexcept>
#include <string>

namespace mrtg {

// Bad argument or violated precondition.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class OutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// File could not be opened, read, written, or parsed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// No cell met the selection thresholds; the pipeline cannot harvest.
class EmptySelection : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mrtg
