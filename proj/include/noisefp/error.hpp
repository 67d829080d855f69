#ifndef NOISEFP_ERROR_HPP
#define NOISEFP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace noisefp {

/// Base of every pipeline failure. kind() names the failure class
/// ("TruncationError", "TooShortError", ...) so the CLI can report it.
class Error : public std::runtime_error {
 public:
  Error(const char* kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  const char* kind() const noexcept { return kind_; }

 private:
  const char* kind_;
};

#define NOISEFP_DEFINE_ERROR(Name)                                     \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(#Name, what) {}     \
  };

NOISEFP_DEFINE_ERROR(FormatError)
NOISEFP_DEFINE_ERROR(TruncationError)
NOISEFP_DEFINE_ERROR(UnsupportedError)
NOISEFP_DEFINE_ERROR(DimensionError)
NOISEFP_DEFINE_ERROR(EmptySeriesError)
NOISEFP_DEFINE_ERROR(OrderError)
NOISEFP_DEFINE_ERROR(TooShortError)
NOISEFP_DEFINE_ERROR(NoBaselineError)
NOISEFP_DEFINE_ERROR(DegenerateError)
NOISEFP_DEFINE_ERROR(DomainError)
NOISEFP_DEFINE_ERROR(ModalityError)
NOISEFP_DEFINE_ERROR(PopulationError)
NOISEFP_DEFINE_ERROR(StoreError)
NOISEFP_DEFINE_ERROR(ConfigError)
NOISEFP_DEFINE_ERROR(IoError)

#undef NOISEFP_DEFINE_ERROR

}  // namespace noisefp

#endif  // NOISEFP_ERROR_HPP
