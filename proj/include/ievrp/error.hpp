#ifndef IEVRP_ERROR_HPP
#define IEVRP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ievrp {

/// Error type for parsing, validation and model-building problems. The
/// message carries the offending file/line or field.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ievrp

#endif  // IEVRP_ERROR_HPP
