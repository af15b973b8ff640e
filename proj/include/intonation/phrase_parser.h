#ifndef INTONATION_PHRASE_PARSER_H
#define INTONATION_PHRASE_PARSER_H

#include <cstddef>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "intonation/errors.h"

namespace intonation::phrase {

enum class Klass { Chink, Chunk };

struct Token {
  std::string text;
  std::string pos;  // empty = untagged
  Klass klass = Klass::Chunk;
};

struct Phrase {
  std::vector<Token> tokens;
  int index = 0;  // 0-based position in sentence
};

/// Word lists driving chink/chunk classification. The bundled lists cover the
/// closed classes (determiners, prepositions, conjunctions, auxiliaries,
/// subjective pronouns, wh-words, particles, complementizers) plus explicit
/// tensed-verb forms and the verb stems the -ed/-s fallback may fire on.
/// They are a reimplementation of the category definitions, not a copy of any
/// published list.
struct Lexicon {
  std::unordered_set<std::string> function_words;
  std::unordered_set<std::string> objective_pronouns;
  std::unordered_set<std::string> tensed_verbs;  // explicit finite forms
  std::unordered_set<std::string> verb_stems;    // gate for suffix rules

  /// Lexicon with the bundled word lists.
  static const Lexicon& bundled();

  /// Parses a lexicon override file: one word per line under
  /// [function_words] / [objective_pronouns] / [tensed_verbs] /
  /// [verb_stems] headers. Sections replace the bundled sets.
  static Lexicon load(const std::string& path);
};

/// Classifies one token. Priority: objective pronoun -> Chunk, tensed verb ->
/// Chink, function word (lexicon or function POS) -> Chink, otherwise Chunk.
/// Total and deterministic.
Klass classify_token(const std::string& text, const std::string& pos,
                     const Lexicon& lexicon);

/// Greedy segmentation into maximal {Chink* Chunk*} phrases. Tokens must
/// already carry their klass (see classify_tokens).
std::vector<Phrase> parse_phrases(const std::vector<Token>& tokens);

/// Classifies every token in place using the lexicon.
void classify_tokens(std::vector<Token>& tokens, const Lexicon& lexicon);

/// Tokenizes one line of `word` or `word/TAG` entries, dropping punctuation
/// tokens, and classifies the result. Convenience for text-file input.
std::vector<Token> tokenize_line(const std::string& line,
                                 const Lexicon& lexicon);

/// Frame span of one word, [start, end).
struct WordSpan {
  int start = 0;
  int end = 0;
};

/// Maps phrases onto frame ranges given one span per word, in token order.
/// Spans must be contiguous and non-overlapping; every token needs a span.
/// Returns one contiguous [start, end) range per phrase.
std::vector<std::pair<int, int>> phrase_frame_ranges(
    const std::vector<Phrase>& phrases, const std::vector<WordSpan>& spans);

}  // namespace intonation::phrase

#endif  // INTONATION_PHRASE_PARSER_H
