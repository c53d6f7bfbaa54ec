#ifndef COSMOS_ERRORS_HPP_
#define COSMOS_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace cosmos {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem / OS-level failures (missing file, unwritable path, short read).
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

// Malformed file contents; carries the offending location in the message.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

// Contract violations on otherwise well-formed inputs. validate_manifest
// collects every issue it finds before throwing.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
  ValidationError(const std::string& what, std::vector<std::string> issues)
      : Error(what), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

}  // namespace cosmos

#endif  // COSMOS_ERRORS_HPP_
