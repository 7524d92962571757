#pragma once

#include <stdexcept>
#include <string>

namespace shadows {

// Bad input: malformed measure, atom outside a kernel's domain, negative scale.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// No measure satisfies the requested order constraints (e.g. shadow does not exist).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename E = DomainError>
inline void require(bool cond, const std::string& what) {
  if (!cond) throw E(what);
}

}  // namespace detail
}  // namespace shadows
