#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace satgeo {

// Failure categories raised by the library. Everything except kIo and
// kConfig is a numerical/domain failure.
enum class ErrorKind {
  kDomain,
  kProjectionSingular,
  kFit,
  kDegenerateCamera,
  kBackProjection,
  kGeometry,
  kFrame,
  kCovariance,
  kDegenerateGeometry,
  kRefinement,
  kIo,
  kConfig,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  // 2 for I/O and configuration problems, 1 for everything numerical.
  int exit_code() const {
    return (kind_ == ErrorKind::kIo || kind_ == ErrorKind::kConfig) ? 2 : 1;
  }

 private:
  ErrorKind kind_;
};

}  // namespace satgeo
