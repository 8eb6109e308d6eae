// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace sclm {

// Base class for all library errors. Subclasses map to distinct CLI exit
// codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape or length disagreement between operands.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& msg) : Error(msg) {}
};

// Unknown modality or duplicate registration.
class RegistryError : public Error {
 public:
  explicit RegistryError(const std::string& msg) : Error(msg) {}
};

// Bad magic, wrong version, or malformed content in a persisted file.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Missing or unreadable file.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// Config or task-file text that does not parse.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

}  // namespace sclm
