#ifndef OCD_STATUS_H_
#define OCD_STATUS_H_

#include <stdexcept>
#include <string>

namespace ocd {

// Error categories. The CLI maps each to a distinct exit status.
enum class ErrorKind {
  kInvalidArgument,  // Domain error: a parameter outside its valid range.
  kConfig,           // Malformed or unknown configuration / flags.
  kIo,               // Missing, unreadable, empty or malformed input files.
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error InvalidArgumentError(const std::string& message) {
  return Error(ErrorKind::kInvalidArgument, message);
}
inline Error ConfigError(const std::string& message) {
  return Error(ErrorKind::kConfig, message);
}
inline Error IoError(const std::string& message) {
  return Error(ErrorKind::kIo, message);
}

}  // namespace ocd

#endif  // OCD_STATUS_H_
