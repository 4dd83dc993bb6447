#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nfd {

// Every library error derives from Error so the CLI can print one
// machine-readable line with the kind tag.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid-argument", what) {}
};

class UnsupportedRank : public Error {
 public:
  explicit UnsupportedRank(const std::string& what) : Error("unsupported-rank", what) {}
};

class UnsupportedRange : public Error {
 public:
  explicit UnsupportedRange(const std::string& what) : Error("unsupported-range", what) {}
};

class BudgetTooSmall : public Error {
 public:
  explicit BudgetTooSmall(const std::string& what) : Error("budget-too-small", what) {}
};

class TheoremPreconditionViolated : public Error {
 public:
  explicit TheoremPreconditionViolated(const std::string& what)
      : Error("theorem-precondition-violated", what) {}
};

class SearchSpaceOverflow : public Error {
 public:
  explicit SearchSpaceOverflow(const std::string& what) : Error("search-space-overflow", what) {}
};

/// Malformed container; `offset` is the byte position where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace nfd
