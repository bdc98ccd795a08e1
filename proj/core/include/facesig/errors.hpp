#ifndef FACESIG_ERRORS_HPP
#define FACESIG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace facesig {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// ingest
struct MissingHeaderField : Error { using Error::Error; };
struct UnknownRiskLabel : Error { using Error::Error; };
struct NonMonotonicFrameIndex : Error { using Error::Error; };
struct EmptyCohort : Error { using Error::Error; };

// signals
struct DegenerateEye : Error { using Error::Error; };
struct DegenerateConfiguration : Error { using Error::Error; };
struct NonPositiveScale : Error { using Error::Error; };

// postproc
struct EvenWindow : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct AllInvalid : Error { using Error::Error; };

// functionals
struct TooShort : Error { using Error::Error; };
struct EmptySeries : Error { using Error::Error; };

// stats
struct ZeroVarianceBoth : Error { using Error::Error; };
struct RankDeficientDesign : Error { using Error::Error; };
struct FewerThanTwoSubjectsPerGroup : Error { using Error::Error; };

// select
struct UnstratifiableFold : Error { using Error::Error; };

// classify
struct TooFewSamples : Error { using Error::Error; };
struct SingleClassTrain : Error { using Error::Error; };
struct EmptyTrueClass : Error { using Error::Error; };

// synth / config
struct InvalidSpec : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace facesig

#endif
