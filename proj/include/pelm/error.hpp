#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pelm {

/// Error category. The numeric value doubles as the CLI exit code.
enum class ErrorKind : int {
  config = 1,
  data = 2,
  numeric = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

/// Runs fn, prefixing any pelm::Error with the stage name.
template <class Fn>
decltype(auto) with_stage(const std::string& stage, Fn&& fn) {
  try {
    return std::forward<Fn>(fn)();
  } catch (const Error& e) {
    throw Error(e.kind(), stage + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::numeric, stage + ": " + e.what());
  }
}

}  // namespace pelm
