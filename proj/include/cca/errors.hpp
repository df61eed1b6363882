#pragma once

#include <stdexcept>
#include <string>

namespace cca {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidConfig : public Error {
public:
  using Error::Error;
};

class InvalidParams : public Error {
public:
  using Error::Error;
};

class EmptyWorld : public Error {
public:
  EmptyWorld() : Error("world has no occupied sites") {}
};

// Internal logic errors: raised when an engine invariant is violated.
class NotAdjacent : public Error {
public:
  using Error::Error;
};

class NotBlocked : public Error {
public:
  using Error::Error;
};

class EmptySample : public Error {
public:
  EmptySample() : Error("sample is empty") {}
};

class DegenerateInput : public Error {
public:
  using Error::Error;
};

class NonMonotoneLog : public Error {
public:
  using Error::Error;
};

class SchemaMismatch : public Error {
public:
  using Error::Error;
};

// Malformed or invalid command line.
class UsageError : public Error {
public:
  using Error::Error;
};

} // namespace cca
