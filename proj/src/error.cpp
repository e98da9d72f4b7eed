#include "trajclass/error.hpp"

namespace trajclass {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Ordering: return "ordering";
    case ErrorKind::Size: return "size";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::Segmentation: return "segmentation";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::InsufficientPoints: return "insufficient-points";
    case ErrorKind::DivisionByZero: return "division-by-zero";
    case ErrorKind::Feature: return "feature";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Filter: return "filter";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Training: return "training";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Label: return "label";
    case ErrorKind::DegenerateSample: return "degenerate-sample";
    case ErrorKind::SampleSize: return "sample-size";
    case ErrorKind::Stratification: return "stratification";
    case ErrorKind::Split: return "split";
    case ErrorKind::Lookup: return "lookup";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace trajclass
