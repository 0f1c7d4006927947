#pragma once

#include <stdexcept>
#include <string>

namespace sismon {

// Problems with input data: malformed files, invariant violations in pools,
// uncovered oracle ids. CLI maps these to exit code 3.
class data_error : public std::runtime_error {
  public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Problems with experiment configuration (JSON config, incompatible design
// combinations). CLI maps these to exit code 4.
class config_error : public std::runtime_error {
  public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sismon
