#pragma once
#include <stdexcept>
#include <string>

namespace mtac {

// Bad inputs, bad configs, structural mismatches. The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem and serialization failures. The CLI maps this to exit code 1.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mtac
