#ifndef INTONATION_ERRORS_H
#define INTONATION_ERRORS_H

#include <stdexcept>
#include <string>

namespace intonation {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define INTONATION_DEFINE_ERROR(NAME)     \
  struct NAME : Error {                   \
    using Error::Error;                   \
  }

// phrase_parser
INTONATION_DEFINE_ERROR(MissingAlignment);
INTONATION_DEFINE_ERROR(OverlapError);

// f0_features
INTONATION_DEFINE_ERROR(AllUnvoiced);
INTONATION_DEFINE_ERROR(EmptyCorpus);
INTONATION_DEFINE_ERROR(LengthMismatch);
INTONATION_DEFINE_ERROR(SingularSystem);

// neural_core / prosody_models
INTONATION_DEFINE_ERROR(ShapeMismatch);
INTONATION_DEFINE_ERROR(NonFiniteLoss);
INTONATION_DEFINE_ERROR(RangeOutOfBounds);
INTONATION_DEFINE_ERROR(DurationMismatch);

// intonation_codes
INTONATION_DEFINE_ERROR(TooFewPoints);
INTONATION_DEFINE_ERROR(DimMismatch);
INTONATION_DEFINE_ERROR(WrongModelKind);

// synthesis
INTONATION_DEFINE_ERROR(PhraseCountMismatch);
INTONATION_DEFINE_ERROR(UnknownPhone);
INTONATION_DEFINE_ERROR(UnknownCode);

// eval_stats
INTONATION_DEFINE_ERROR(InvalidCounts);
INTONATION_DEFINE_ERROR(InvalidP);

// cli_pipeline
INTONATION_DEFINE_ERROR(FileMissing);
INTONATION_DEFINE_ERROR(AlignmentGap);
INTONATION_DEFINE_ERROR(InvalidParams);
INTONATION_DEFINE_ERROR(ConfigError);

// Invariant violations that indicate a bug rather than bad input.
INTONATION_DEFINE_ERROR(InternalError);

#undef INTONATION_DEFINE_ERROR

// Parse/format error carrying the offending line number.
struct FormatError : Error {
  FormatError(const std::string& what, int line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
  explicit FormatError(const std::string& what) : Error(what), line_number(-1) {}
  int line_number;
};

}  // namespace intonation

#endif  // INTONATION_ERRORS_H
