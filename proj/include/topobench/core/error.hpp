#pragma once

#include <stdexcept>
#include <string>

namespace topobench {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied parameters or inputs that break a precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent data on disk or in memory.
class DataError : public Error {
 public:
  using Error::Error;
};

// A route distance was requested that the available data cannot answer.
class UnavailableDistance : public Error {
 public:
  using Error::Error;
};

}  // namespace topobench
