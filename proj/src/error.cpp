#include "fgvc/error.hpp"

namespace fgvc {

std::span<const Errc> all_errcs() {
  static constexpr Errc kAll[] = {
      Errc::InvalidSchedule, Errc::ShapeMismatch, Errc::ProfileMismatch, Errc::EmptyCorpus,
      Errc::NonpositiveVariance, Errc::ZeroDensity, Errc::ChunkTooHot, Errc::MalformedCode,
      Errc::SeedOutOfRange, Errc::VideoTooShort, Errc::BadDims, Errc::OverlapTooLarge,
      Errc::BadGopParams, Errc::MalformedBitstream, Errc::DegenerateFit,
      Errc::NonInvertibleSurrogate, Errc::MissingAlignmentAnchor, Errc::ZeroDims,
      Errc::TooSmallForScales, Errc::NoBoundaries, Errc::NotPositiveDefinite, Errc::FileNotFound,
      Errc::MalformedY4M, Errc::UnsupportedChroma, Errc::SizeMismatch, Errc::BadConfig,
      Errc::IoError};
  return kAll;
}

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidSchedule: return "InvalidSchedule";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::ProfileMismatch: return "ProfileMismatch";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::NonpositiveVariance: return "NonpositiveVariance";
    case Errc::ZeroDensity: return "ZeroDensity";
    case Errc::ChunkTooHot: return "ChunkTooHot";
    case Errc::MalformedCode: return "MalformedCode";
    case Errc::SeedOutOfRange: return "SeedOutOfRange";
    case Errc::VideoTooShort: return "VideoTooShort";
    case Errc::BadDims: return "BadDims";
    case Errc::OverlapTooLarge: return "OverlapTooLarge";
    case Errc::BadGopParams: return "BadGopParams";
    case Errc::MalformedBitstream: return "MalformedBitstream";
    case Errc::DegenerateFit: return "DegenerateFit";
    case Errc::NonInvertibleSurrogate: return "NonInvertibleSurrogate";
    case Errc::MissingAlignmentAnchor: return "MissingAlignmentAnchor";
    case Errc::ZeroDims: return "ZeroDims";
    case Errc::TooSmallForScales: return "TooSmallForScales";
    case Errc::NoBoundaries: return "NoBoundaries";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::MalformedY4M: return "MalformedY4M";
    case Errc::UnsupportedChroma: return "UnsupportedChroma";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::BadConfig: return "BadConfig";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace fgvc
