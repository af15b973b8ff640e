#include "intonation/phrase_parser.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace intonation::phrase {

namespace {

std::string lower(const std::string& s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// POS tags that mark closed-class function words.
bool is_function_pos(const std::string& pos) {
  static const std::unordered_set<std::string> kTags = {
      "DT", "IN", "CC", "TO", "MD", "EX", "PDT", "POS",
      "RP", "WDT", "WP", "WP$", "WRB", "PRP", "PRP$"};
  return kTags.count(pos) > 0;
}

bool ends_with(const std::string& s, const char* suffix) {
  std::string_view v(suffix);
  return s.size() >= v.size() && s.compare(s.size() - v.size(), v.size(), v) == 0;
}

// Fallback tensed-verb test for untagged tokens: the -ed/-s suffix rules fire
// only when the implied stem is in the lexicon's verb-stem list.
bool suffix_rule_tensed(const std::string& word, const Lexicon& lex) {
  const auto& stems = lex.verb_stems;
  auto known = [&stems](const std::string& s) { return stems.count(s) > 0; };
  if (ends_with(word, "ied") && word.size() > 3) {
    if (known(word.substr(0, word.size() - 3) + "y")) return true;
  }
  if (ends_with(word, "ed") && word.size() > 2) {
    std::string stem = word.substr(0, word.size() - 2);
    if (known(stem)) return true;
    if (known(stem + "e")) return true;
    // doubled final consonant: tugged -> tug
    if (stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
        known(stem.substr(0, stem.size() - 1))) {
      return true;
    }
  }
  if (ends_with(word, "ies") && word.size() > 3) {
    if (known(word.substr(0, word.size() - 3) + "y")) return true;
  }
  if (ends_with(word, "es") && word.size() > 2 &&
      known(word.substr(0, word.size() - 2))) {
    return true;
  }
  if (ends_with(word, "s") && !ends_with(word, "ss") && word.size() > 1 &&
      known(word.substr(0, word.size() - 1))) {
    return true;
  }
  return false;
}

Lexicon make_bundled_lexicon() {
  Lexicon lex;
  // Determiners, quantifiers.
  for (const char* w :
       {"the", "a",     "an",    "this",  "that",    "these", "those",
        "each", "every", "some",  "any",   "no",      "all",   "both",
        "half", "either", "neither", "such", "enough", "few",  "several",
        "most", "many",  "much",  "more",  "another", "other"})
    lex.function_words.insert(w);
  // Prepositions.
  for (const char* w :
       {"of",      "in",      "on",      "at",      "by",      "for",
        "with",    "about",   "against", "between", "into",    "through",
        "during",  "before",  "after",   "above",   "below",   "to",
        "from",    "up",      "down",    "out",     "off",     "over",
        "under",   "near",    "upon",    "across",  "along",   "around",
        "behind",  "beside",  "beyond",  "inside",  "outside", "onto",
        "toward",  "towards", "within",  "without", "until",   "till",
        "since",   "than",    "as",      "like",    "past",    "via"})
    lex.function_words.insert(w);
  // Conjunctions and complementizers.
  for (const char* w :
       {"and", "or", "but", "nor", "yet", "if", "because", "although",
        "though", "while", "when", "whenever", "wherever", "unless",
        "whether", "once", "whereas"})
    lex.function_words.insert(w);
  // Auxiliaries and modals (finite and non-finite forms).
  for (const char* w :
       {"am", "is", "are", "was", "were", "be", "been", "being", "do",
        "does", "did", "have", "has", "had", "having", "will", "would",
        "shall", "should", "can", "could", "may", "might", "must", "ought",
        "not"})
    lex.function_words.insert(w);
  // Subjective pronouns and possessive determiners.
  for (const char* w :
       {"i", "you", "he", "she", "it", "we", "they", "one", "my", "your",
        "his", "its", "our", "their", "mine", "yours", "ours", "theirs"})
    lex.function_words.insert(w);
  // Wh-words.
  for (const char* w :
       {"what", "who", "whom", "whose", "which", "where", "why", "how"})
    lex.function_words.insert(w);
  // Degree words and existential there.
  for (const char* w : {"so", "too", "very", "quite", "rather", "there"})
    lex.function_words.insert(w);
  // Subject+auxiliary contractions, kept fused at the word level the way
  // alignment lexicons list them. Negated forms (didn't, can't, ...) are
  // deliberately absent: negation attracts accent, so they pattern with
  // content words.
  for (const char* w :
       {"i'm",    "i've",   "i'll",   "i'd",     "you're", "you've",
        "you'll", "you'd",  "he's",   "he'll",   "he'd",   "she's",
        "she'll", "she'd",  "it's",   "it'll",   "we're",  "we've",
        "we'll",  "we'd",   "they're", "they've", "they'll", "they'd",
        "there's", "that's", "who's",  "what's",  "where's", "when's",
        "how's",  "why's",  "here's", "let's"})
    lex.function_words.insert(w);
  // Clitic auxiliaries produced by split tokenization ("What 's").
  for (const char* w : {"'s", "'re", "'m", "'ve", "'ll", "'d"})
    lex.function_words.insert(w);

  lex.objective_pronouns = {"me", "him", "her", "us", "them"};

  // Explicit tensed forms: finite auxiliaries plus common irregular pasts
  // and frequent finite presents.
  for (const char* w :
       {"am",    "is",     "are",   "was",   "were",  "has",   "had",
        "does",  "did",    "'s",    "'re",   "'m",    "'ve",   "'ll",
        "'d",    "say",    "says",  "said",  "went",  "came",  "sat",
        "stood", "ran",    "got",   "gave",  "took",  "made",  "knew",
        "thought", "felt", "found", "told",  "saw",   "heard", "kept",
        "began", "brought", "think", "thinks", "know", "knows", "seem",
        "seems"})
    lex.tensed_verbs.insert(w);

  // Verb stems the suffix rules may fire on. A small closed sample; words
  // outside it fall through to the content-word default.
  for (const char* w :
       {"want",  "climb", "tug",    "pull",  "push",  "walk", "jump",
        "look",  "call",  "turn",   "ask",   "help",  "talk", "play",
        "open",  "start", "stop",   "wait",  "laugh", "shout", "knock",
        "pick",  "follow", "happen", "listen", "live", "stay"})
    lex.verb_stems.insert(w);
  return lex;
}

}  // namespace

const Lexicon& Lexicon::bundled() {
  static const Lexicon lex = make_bundled_lexicon();
  return lex;
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileMissing("cannot open lexicon file: " + path);
  Lexicon lex = bundled();
  std::unordered_set<std::string>* target = nullptr;
  std::string line;
  int line_no = 0;
  bool cleared_function = false, cleared_obj = false, cleared_tensed = false,
       cleared_stems = false;
  while (std::getline(in, line)) {
    ++line_no;
    // trim
    auto b = line.find_first_not_of(" \t\r\n");
    auto e = line.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    std::string word = line.substr(b, e - b + 1);
    if (word[0] == '#') continue;
    if (word == "[function_words]") {
      target = &lex.function_words;
      if (!cleared_function) { target->clear(); cleared_function = true; }
      continue;
    }
    if (word == "[objective_pronouns]") {
      target = &lex.objective_pronouns;
      if (!cleared_obj) { target->clear(); cleared_obj = true; }
      continue;
    }
    if (word == "[tensed_verbs]") {
      target = &lex.tensed_verbs;
      if (!cleared_tensed) { target->clear(); cleared_tensed = true; }
      continue;
    }
    if (word == "[verb_stems]") {
      target = &lex.verb_stems;
      if (!cleared_stems) { target->clear(); cleared_stems = true; }
      continue;
    }
    if (word[0] == '[')
      throw FormatError("unknown lexicon section " + word, line_no);
    if (!target)
      throw FormatError("word before any [section] header", line_no);
    target->insert(lower(word));
  }
  return lex;
}

Klass classify_token(const std::string& text, const std::string& pos,
                     const Lexicon& lexicon) {
  if (text.empty()) throw InvalidParams("classify_token: empty token text");
  const std::string w = lower(text);

  // (1) objective pronoun -> Chunk. A PRP$ tag marks the possessive
  // determiner reading ("her book"), which is not an objective occurrence.
  if (lexicon.objective_pronouns.count(w) > 0 && pos != "PRP$") {
    return Klass::Chunk;
  }
  // (2) tensed verb -> Chink. Tags decide when present; otherwise the
  // explicit form list plus the gated suffix rules.
  if (!pos.empty()) {
    if (pos == "VBD" || pos == "VBZ" || pos == "VBP") return Klass::Chink;
    if (pos == "VB" || pos == "VBG" || pos == "VBN") {
      // Untensed verb form: skip straight to the function-word test.
      if (lexicon.function_words.count(w) > 0) return Klass::Chink;
      return Klass::Chunk;
    }
  } else if (lexicon.tensed_verbs.count(w) > 0 ||
             suffix_rule_tensed(w, lexicon)) {
    return Klass::Chink;
  }
  // (3) function word -> Chink.
  if (lexicon.function_words.count(w) > 0) return Klass::Chink;
  if (!pos.empty() && is_function_pos(pos)) return Klass::Chink;
  // (4) content word -> Chunk.
  return Klass::Chunk;
}

void classify_tokens(std::vector<Token>& tokens, const Lexicon& lexicon) {
  for (auto& t : tokens) t.klass = classify_token(t.text, t.pos, lexicon);
}

std::vector<Phrase> parse_phrases(const std::vector<Token>& tokens) {
  std::vector<Phrase> phrases;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool boundary =
        i == 0 || (tokens[i].klass == Klass::Chink &&
                   tokens[i - 1].klass == Klass::Chunk);
    if (boundary) {
      Phrase p;
      p.index = static_cast<int>(phrases.size());
      phrases.push_back(std::move(p));
    }
    phrases.back().tokens.push_back(tokens[i]);
  }
  return phrases;
}

std::vector<Token> tokenize_line(const std::string& line,
                                 const Lexicon& lexicon) {
  static const std::string kStrip = "\"`.,:;!?()[]{}";
  std::vector<Token> tokens;
  std::istringstream ss(line);
  std::string raw;
  while (ss >> raw) {
    // Separate an optional /TAG suffix (split at the last slash).
    std::string word = raw, pos;
    auto slash = raw.rfind('/');
    if (slash != std::string::npos && slash > 0 && slash + 1 < raw.size()) {
      word = raw.substr(0, slash);
      pos = raw.substr(slash + 1);
    }
    // Trim punctuation (apostrophes kept: 's, didn't).
    auto b = word.find_first_not_of(kStrip);
    auto e = word.find_last_not_of(kStrip);
    if (b == std::string::npos) continue;  // pure punctuation token
    word = word.substr(b, e - b + 1);
    bool has_alnum = std::any_of(word.begin(), word.end(), [](unsigned char c) {
      return std::isalnum(c);
    });
    if (!has_alnum) continue;
    Token t;
    t.text = word;
    t.pos = pos;
    t.klass = classify_token(word, pos, lexicon);
    tokens.push_back(std::move(t));
  }
  return tokens;
}

std::vector<std::pair<int, int>> phrase_frame_ranges(
    const std::vector<Phrase>& phrases, const std::vector<WordSpan>& spans) {
  std::size_t n_tokens = 0;
  for (const auto& p : phrases) n_tokens += p.tokens.size();
  if (spans.size() < n_tokens) {
    throw MissingAlignment("phrase_frame_ranges: " +
                           std::to_string(n_tokens - spans.size()) +
                           " token(s) lack a word span");
  }
  if (spans.size() > n_tokens) {
    throw MissingAlignment("phrase_frame_ranges: more word spans than tokens");
  }
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (spans[i].start >= spans[i].end)
      throw MissingAlignment("phrase_frame_ranges: empty word span at index " +
                             std::to_string(i));
    if (i > 0) {
      if (spans[i].start < spans[i - 1].end)
        throw OverlapError("phrase_frame_ranges: word spans overlap at index " +
                           std::to_string(i));
      if (spans[i].start > spans[i - 1].end)
        throw MissingAlignment(
            "phrase_frame_ranges: gap between word spans at index " +
            std::to_string(i));
    }
  }
  std::vector<std::pair<int, int>> ranges;
  ranges.reserve(phrases.size());
  std::size_t cursor = 0;
  for (const auto& p : phrases) {
    const int start = spans[cursor].start;
    cursor += p.tokens.size();
    const int end = spans[cursor - 1].end;
    ranges.emplace_back(start, end);
  }
  return ranges;
}

}  // namespace intonation::phrase
