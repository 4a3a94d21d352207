// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace selfplan {

/// Root of every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A record, card, or configuration value failed validation.
class InvalidRecord : public Error {
public:
    using Error::Error;
};

/// No `Name[param]` form could be extracted from model output.
class MalformedAction : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace selfplan
