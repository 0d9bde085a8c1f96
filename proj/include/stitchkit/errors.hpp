#pragma once

#include <stdexcept>
#include <string>

namespace stitchkit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateProjection : Error { using Error::Error; };
struct DegenerateBaseline : Error { using Error::Error; };
struct InvalidSpec : Error { using Error::Error; };
struct BucketUnreachable : Error { using Error::Error; };
struct InconsistentSample : Error { using Error::Error; };
struct InsufficientOverlap : Error { using Error::Error; };
struct DegenerateConfiguration : Error { using Error::Error; };
struct AnchorOutOfCanvas : Error { using Error::Error; };
struct EmptyEvalRegion : Error { using Error::Error; };

// File format errors.
struct BadMagic : Error { using Error::Error; };
struct TruncatedFile : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace stitchkit
