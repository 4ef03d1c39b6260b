#include "satgeo/error.h"

namespace satgeo {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kProjectionSingular: return "projection-singular";
    case ErrorKind::kFit: return "fit";
    case ErrorKind::kDegenerateCamera: return "degenerate-camera";
    case ErrorKind::kBackProjection: return "back-projection";
    case ErrorKind::kGeometry: return "geometry";
    case ErrorKind::kFrame: return "frame";
    case ErrorKind::kCovariance: return "covariance";
    case ErrorKind::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::kRefinement: return "refinement";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace satgeo
