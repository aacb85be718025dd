#ifndef KINESIM_ERRORS_HPP_
#define KINESIM_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kinesim {

/// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// Non-finite values produced or consumed by a numeric routine.
class NumericError : public Error {
 public:
  using Error::Error;
};

class JointLimitError : public Error {
 public:
  JointLimitError(std::size_t joint, const std::string& what)
      : Error(what), joint_(joint) {}
  std::size_t joint() const noexcept { return joint_; }

 private:
  std::size_t joint_;
};

/// Missing or inconsistent model data (e.g. dynamics without inertias).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class DuplicateId : public Error {
 public:
  using Error::Error;
};

class UnknownId : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Document bytes that do not match the schema. `path()` names the field.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class CsvError : public Error {
 public:
  CsvError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Failures of the host environment: sockets, files.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

}  // namespace kinesim

#endif  // KINESIM_ERRORS_HPP_
