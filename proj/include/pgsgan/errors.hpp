#pragma once

#include <stdexcept>
#include <string>

namespace pgsgan {

// Exit-code classes used by the command-line tool:
// 1 usage/config, 2 data, 3 numerical abort.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace pgsgan
