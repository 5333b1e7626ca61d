#pragma once

#include <stdexcept>
#include <string>

namespace geodrop {

// Base class for all toolkit errors so callers can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };
struct NumericalError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct SingularMetricError : Error { using Error::Error; };
struct EmptyMaskError : Error { using Error::Error; };
struct DegenerateChartError : Error { using Error::Error; };
struct DegenerateMaskError : Error { using Error::Error; };
struct CapacityError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct UnsupportedError : Error { using Error::Error; };

} // namespace geodrop
