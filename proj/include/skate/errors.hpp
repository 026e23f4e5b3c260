#pragma once

#include <stdexcept>
#include <string>

namespace skate {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SKATE_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& what) : Error(what) {}   \
    }

// controls
SKATE_DEFINE_ERROR(SingularControl);
// ode
SKATE_DEFINE_ERROR(StepSizeUnderflow);
SKATE_DEFINE_ERROR(NonFiniteState);
SKATE_DEFINE_ERROR(OutOfRange);
// arcopt
SKATE_DEFINE_ERROR(DegenerateArc);
SKATE_DEFINE_ERROR(OptimizationFailed);
// arcfit
SKATE_DEFINE_ERROR(EmptySegment);
SKATE_DEFINE_ERROR(FitFailed);
SKATE_DEFINE_ERROR(DuplicatePoints);
// pattern
SKATE_DEFINE_ERROR(JoinGap);
SKATE_DEFINE_ERROR(NonzeroJoinSpeed);
// io
SKATE_DEFINE_ERROR(ParseError);
SKATE_DEFINE_ERROR(IoError);

#undef SKATE_DEFINE_ERROR

}  // namespace skate
