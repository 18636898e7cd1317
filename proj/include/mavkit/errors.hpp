#pragma once

#include <stdexcept>
#include <string>

namespace mavkit {

struct PayloadTooLong : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FlagSignatureMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ArityMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TypeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LengthMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CatalogError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BadKeyFile : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LinkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CaptureCorrupt : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonContiguousSeq : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioInvalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mavkit
