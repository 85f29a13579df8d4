#pragma once

#include <stdexcept>
#include <string>

namespace slam3d {

/// Base of every error raised by the library. Callers that only need to
/// report a failure can catch this; the subclasses exist so tests and the
/// CLI can tell data errors apart from programming errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// KITTI text parsing
class FieldCountError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class RangeError : public Error { using Error::Error; };
class MissingKeyError : public Error { using Error::Error; };

// Binary image / snapshot formats
class FormatError : public Error { using Error::Error; };
class TruncatedData : public Error { using Error::Error; };

// Tensor and image shape contracts
class ShapeMismatch : public Error { using Error::Error; };
using ShapeError = ShapeMismatch;
class DimensionMismatch : public Error { using Error::Error; };

// Op recorder used before its forward pass
class StateError : public Error { using Error::Error; };

// Evaluation
class EmptyGT : public Error { using Error::Error; };
class InsufficientData : public Error { using Error::Error; };
class FrameSetMismatch : public Error { using Error::Error; };

/// Aggregate of per-file parse failures; what() lists each offending frame.
class ParseErrors : public Error { using Error::Error; };

}  // namespace slam3d
