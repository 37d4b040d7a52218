#ifndef ENTROGAME_ERRORS_HPP
#define ENTROGAME_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace entrogame {

// Malformed descriptors, files, schema violations. CLI exit code 2.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A stated precondition does not hold (non-ergodic source, non-mixable
// learning rate, conditioning on a null event, ...). CLI exit code 3.
class PreconditionError : public std::runtime_error {
  public:
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace entrogame

#endif
