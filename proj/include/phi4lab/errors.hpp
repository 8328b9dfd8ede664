#pragma once

#include <stdexcept>
#include <string>

namespace phi4lab {

// Error taxonomy shared by all modules. The CLI maps kinds to exit codes.
enum class ErrorKind {
  Input,        // bad arguments, invalid config, precondition violation
  Capacity,     // a configured budget (memory, cells, table size) would be exceeded
  Numeric,      // quadrature / root-finding failed to reach its tolerance
  Integrity,    // checksum or manifest mismatch
  Degenerate,   // degenerate schedule (all scale terms zero)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error input_error(const std::string& msg) { return Error(ErrorKind::Input, msg); }
inline Error capacity_error(const std::string& msg) { return Error(ErrorKind::Capacity, msg); }
inline Error numeric_error(const std::string& msg) { return Error(ErrorKind::Numeric, msg); }
inline Error integrity_error(const std::string& msg) { return Error(ErrorKind::Integrity, msg); }
inline Error degenerate_error(const std::string& msg) { return Error(ErrorKind::Degenerate, msg); }

}  // namespace phi4lab
