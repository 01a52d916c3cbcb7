#pragma once

#include <span>
#include <stdexcept>
#include <string>

namespace fgvc {

// Values double as CLI exit codes; keep them stable.
enum class Errc : int {
  InvalidSchedule = 10,
  ShapeMismatch = 11,
  ProfileMismatch = 12,
  EmptyCorpus = 13,
  NonpositiveVariance = 20,
  ZeroDensity = 21,
  ChunkTooHot = 22,
  MalformedCode = 23,
  SeedOutOfRange = 24,
  VideoTooShort = 30,
  BadDims = 31,
  OverlapTooLarge = 32,
  BadGopParams = 33,
  MalformedBitstream = 34,
  DegenerateFit = 40,
  NonInvertibleSurrogate = 41,
  MissingAlignmentAnchor = 42,
  ZeroDims = 50,
  TooSmallForScales = 51,
  NoBoundaries = 52,
  NotPositiveDefinite = 60,
  FileNotFound = 70,
  MalformedY4M = 71,
  UnsupportedChroma = 72,
  SizeMismatch = 73,
  BadConfig = 74,
  IoError = 75,
};

const char* errc_name(Errc code);
std::span<const Errc> all_errcs();

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace fgvc
