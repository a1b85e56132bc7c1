#ifndef CPKIT_ERRORS_HPP
#define CPKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cpkit {

// Base for every error thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// series-core
struct FewerThanTwoCycles : Error { using Error::Error; };
struct NonPositiveVariance : Error { using Error::Error; };
struct PeriodMismatch : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct LagTooLarge : Error { using Error::Error; };
struct SampleSizeOutOfRange : Error { using Error::Error; };
struct InvalidSeries : Error { using Error::Error; };

// ar-model
struct NonStationaryFit : Error { using Error::Error; };
struct SeriesTooShort : Error { using Error::Error; };
struct ModelSeriesMismatch : Error { using Error::Error; };

// amoc
struct ZeroVariance : Error { using Error::Error; };

// mcpt
struct SegmentTooShort : Error { using Error::Error; };
struct ProblemTooLarge : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };

// datasets
struct ParseError : Error { using Error::Error; };
struct MissingValueInRange : Error { using Error::Error; };
struct FileNotFound : Error { using Error::Error; };

} // namespace cpkit

#endif
