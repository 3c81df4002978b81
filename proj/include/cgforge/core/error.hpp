#pragma once

#include <stdexcept>
#include <string>

namespace cgforge {

// Root of all recoverable failures raised by the toolkit. The CLI maps
// subclasses onto exit codes (see cli/app.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CGFORGE_DEFINE_ERROR(Name, Base)  \
  class Name : public Base {              \
   public:                                \
    using Base::Base;                     \
  };

// sql-core
CGFORGE_DEFINE_ERROR(ParseError, Error)
CGFORGE_DEFINE_ERROR(ResolutionError, Error)

// dataset-io
CGFORGE_DEFINE_ERROR(FormatError, Error)
CGFORGE_DEFINE_ERROR(DuplicateDbId, FormatError)
CGFORGE_DEFINE_ERROR(UnknownDatabase, Error)
CGFORGE_DEFINE_ERROR(IoError, Error)

// recombiner
CGFORGE_DEFINE_ERROR(ApplyError, Error)
CGFORGE_DEFINE_ERROR(NoFill, Error)
CGFORGE_DEFINE_ERROR(UnknownTemplate, Error)

// drafter
CGFORGE_DEFINE_ERROR(UnrealizableEdit, Error)
CGFORGE_DEFINE_ERROR(ExternalFailure, Error)

// review-svc
CGFORGE_DEFINE_ERROR(StoreError, IoError)
CGFORGE_DEFINE_ERROR(UnknownCandidate, Error)
CGFORGE_DEFINE_ERROR(InvalidDecision, Error)
CGFORGE_DEFINE_ERROR(BindError, IoError)

// Broken internal invariant; never expected on valid input.
CGFORGE_DEFINE_ERROR(InvariantError, Error)

#undef CGFORGE_DEFINE_ERROR

}  // namespace cgforge
