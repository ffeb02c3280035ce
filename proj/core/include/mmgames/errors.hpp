#ifndef MMGAMES_ERRORS_HPP
#define MMGAMES_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mmg {

// invalid or inconsistent user input (config files, CLI arguments, bad dimensions)
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// a solver failed to reach its tolerance (power iteration, pi series, step size too large)
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mmg

#endif
