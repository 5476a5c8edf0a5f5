#pragma once

#include <stdexcept>
#include <string>

namespace aberrasim {

/// File-system and container-format failures (open, read, write, decode),
/// kept distinct from numeric failures so callers can map them to their
/// own error classes.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace aberrasim
