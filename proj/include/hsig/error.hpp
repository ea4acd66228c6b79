#pragma once

#include <stdexcept>
#include <string>

namespace hsig {

// Every failure raised by the library derives from Error so front ends can
// catch one type and still dispatch on the concrete kind.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HSIG_DEFINE_ERROR(Name)                                                \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {}   \
    }

// Input parsing
HSIG_DEFINE_ERROR(MalformedInput);
HSIG_DEFINE_ERROR(NonMonotonicTime);
HSIG_DEFINE_ERROR(TooFewSamples);

// Profile persistence
HSIG_DEFINE_ERROR(CorruptProfile);
HSIG_DEFINE_ERROR(SchemaMismatch);
HSIG_DEFINE_ERROR(InvariantViolation);

// Numerical pipeline
HSIG_DEFINE_ERROR(DegenerateGeometry);
HSIG_DEFINE_ERROR(NotDivisible);
HSIG_DEFINE_ERROR(EmptyPartition);
HSIG_DEFINE_ERROR(LengthMismatch);

// Evaluation
HSIG_DEFINE_ERROR(EmptyScoreList);
HSIG_DEFINE_ERROR(MixedConfigurations);
HSIG_DEFINE_ERROR(InsufficientSignatures);

#undef HSIG_DEFINE_ERROR

} // namespace hsig
