#pragma once

#include <stdexcept>
#include <string>

namespace msf {

// Thrown on contract violations and numerical faults. The C API maps these
// to status codes at the library boundary; the CLI turns them into nonzero
// exit codes with a diagnostic.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace msf
