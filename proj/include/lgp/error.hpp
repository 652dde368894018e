#ifndef LGP_ERROR_HPP
#define LGP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lgp {

/// Validation errors are caller mistakes (bad config, out-of-range input).
/// Invariant errors mean a computed object broke a property it must have.
enum class ErrorKind { validation, invariant };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error validation_error(const std::string& what) { return Error(ErrorKind::validation, what); }
inline Error invariant_error(const std::string& what) { return Error(ErrorKind::invariant, what); }

}  // namespace lgp

#endif  // LGP_ERROR_HPP
