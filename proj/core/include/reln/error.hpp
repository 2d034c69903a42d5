#pragma once

#include <stdexcept>
#include <string>

namespace reln {

enum class ErrorKind {
  kInvalidParameter,
  kShape,
  kDegenerateStatistics,
  kDiverged,
  kDomain,
  kUnsupported,
  kUnderParameterized,
  kInapplicable,
  kStability,
  kIo,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and the CLI
/// exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when training blows up; remembers the epoch it was detected at.
class DivergedError : public Error {
 public:
  DivergedError(int epoch, double loss)
      : Error(ErrorKind::kDiverged, "loss " + std::to_string(loss) + " at epoch " +
                                        std::to_string(epoch)),
        epoch_(epoch),
        loss_(loss) {}

  int epoch() const noexcept { return epoch_; }
  double loss() const noexcept { return loss_; }

 private:
  int epoch_;
  double loss_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace reln
