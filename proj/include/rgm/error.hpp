#pragma once

#include <stdexcept>
#include <string>

namespace rgm {

// Base of every error the toolkit throws. The `kind()` string is what the CLI
// prints next to the failing stage.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define RGM_DEFINE_ERROR(Name, tag)                                  \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(tag, what) {}     \
  };

RGM_DEFINE_ERROR(FormatError, "format error")
RGM_DEFINE_ERROR(ArgumentError, "argument error")
RGM_DEFINE_ERROR(CapabilityError, "capability error")
RGM_DEFINE_ERROR(GenerationError, "generation error")
RGM_DEFINE_ERROR(SamplingError, "sampling error")
RGM_DEFINE_ERROR(TrainingError, "training error")
RGM_DEFINE_ERROR(LoadError, "load error")
RGM_DEFINE_ERROR(SplitError, "split error")

#undef RGM_DEFINE_ERROR

}  // namespace rgm
