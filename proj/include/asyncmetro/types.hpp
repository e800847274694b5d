#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace asyncmetro {

using NodeId = std::uint32_t;
using State = std::uint32_t;

/// Raised when an operation is asked for something it cannot compute
/// (state space too large, no closed form for a user-defined model, ...).
class unsupported_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an internal invariant breaks. Seeing one means a bug in this
/// library, not bad input.
class invariant_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void check_invariant(bool ok, const std::string& what) {
  if (!ok) throw invariant_error(what);
}

}  // namespace asyncmetro
