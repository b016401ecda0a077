#pragma once

#include <stdexcept>
#include <string>

namespace semsentry {

/// Base class for all semsentry errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A domain value violates one of its invariants (bad interval, confidence
/// out of range, overlapping intervals, ...). Maps to CLI exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Input text could not be parsed (malformed episode line, unknown enum
/// value, response without an overall classification). Exit code 2.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure independent of content.
class IoError : public Error {
public:
    using Error::Error;
};

/// Backend transport failure, timeout after retries, or a strict-replay
/// cache miss. Maps to CLI exit code 3.
class BackendError : public Error {
public:
    using Error::Error;
};

/// Command line misuse. Exit code 1.
class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace semsentry
