#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "intonation/phrase_parser.h"

using namespace intonation;
using namespace intonation::phrase;

namespace {

std::vector<Token> tokens_from_line(const std::string& line) {
  return tokenize_line(line, Lexicon::bundled());
}

std::string phrase_text(const Phrase& p) {
  std::string out;
  for (const auto& t : p.tokens) {
    if (!out.empty()) out += ' ';
    out += t.text;
  }
  return out;
}

std::vector<Token> tokens_with_klass(const std::vector<int>& klasses) {
  std::vector<Token> tokens;
  for (int k : klasses) {
    Token t;
    t.text = "w";
    t.klass = k == 0 ? Klass::Chink : Klass::Chunk;
    tokens.push_back(t);
  }
  return tokens;
}

}  // namespace

TEST_CASE("classify_token follows the priority order") {
  const Lexicon& lex = Lexicon::bundled();
  CHECK(classify_token("him", "PRP", lex) == Klass::Chunk);
  CHECK(classify_token("wanted", "VBD", lex) == Klass::Chink);
  CHECK(classify_token("turnip", "NN", lex) == Klass::Chunk);
  // objective pronoun beats the function-word reading, except as PRP$
  CHECK(classify_token("her", "PRP", lex) == Klass::Chunk);
  CHECK(classify_token("her", "", lex) == Klass::Chunk);
  CHECK(classify_token("her", "PRP$", lex) == Klass::Chink);
  // untensed verb forms are content words, unless closed-class
  CHECK(classify_token("make", "VB", lex) == Klass::Chunk);
  CHECK(classify_token("be", "VB", lex) == Klass::Chink);
  CHECK(classify_token("running", "VBG", lex) == Klass::Chunk);
  // untagged fallbacks
  CHECK(classify_token("it", "", lex) == Klass::Chink);
  CHECK(classify_token("'s", "", lex) == Klass::Chink);
  CHECK(classify_token("sat", "", lex) == Klass::Chink);
  CHECK(classify_token("climbed", "", lex) == Klass::Chink);
  CHECK(classify_token("tugged", "", lex) == Klass::Chink);
  CHECK(classify_token("wants", "", lex) == Klass::Chink);
  CHECK(classify_token("didn't", "", lex) == Klass::Chunk);
  CHECK(classify_token("cried", "", lex) == Klass::Chunk);
  CHECK(classify_token("Turnip", "", lex) == Klass::Chunk);
  CHECK(classify_token("The", "", lex) == Klass::Chink);
  CHECK_THROWS_AS(classify_token("", "", lex), InvalidParams);
}

TEST_CASE("parse_phrases matches the worked sentences") {
  SUBCASE("single-phrase question") {
    auto tokens = tokens_from_line("What 's the matter now ?");
    REQUIRE(tokens.size() == 5);
    CHECK(tokens[0].klass == Klass::Chink);
    CHECK(tokens[1].klass == Klass::Chink);
    CHECK(tokens[2].klass == Klass::Chink);
    CHECK(tokens[3].klass == Klass::Chunk);
    CHECK(tokens[4].klass == Klass::Chunk);
    auto phrases = parse_phrases(tokens);
    REQUIRE(phrases.size() == 1);
    CHECK(phrases[0].tokens.size() == 5);
  }
  SUBCASE("empty input") {
    CHECK(parse_phrases({}).empty());
  }
  SUBCASE("two-phrase sentence") {
    auto tokens = tokens_from_line("The cat sat on the mat");
    auto phrases = parse_phrases(tokens);
    REQUIRE(phrases.size() == 2);
    CHECK(phrase_text(phrases[0]) == "The cat");
    CHECK(phrase_text(phrases[1]) == "sat on the mat");
    CHECK(phrases[0].index == 0);
    CHECK(phrases[1].index == 1);
  }
}

TEST_CASE("parse_phrases properties on random klass sequences") {
  std::mt19937 rng(12345);
  for (int trial = 0; trial < 2000; ++trial) {
    const int len = static_cast<int>(rng() % 30);
    std::vector<int> klasses(len);
    for (auto& k : klasses) k = static_cast<int>(rng() % 2);
    auto tokens = tokens_with_klass(klasses);
    auto phrases = parse_phrases(tokens);

    // reconstruction
    std::size_t total = 0;
    for (const auto& p : phrases) total += p.tokens.size();
    REQUIRE(total == tokens.size());
    std::size_t pos = 0;
    for (const auto& p : phrases) {
      for (const auto& t : p.tokens) {
        REQUIRE(t.klass == tokens[pos].klass);
        ++pos;
      }
    }
    // pattern Chink* Chunk*
    for (const auto& p : phrases) {
      bool seen_chunk = false;
      for (const auto& t : p.tokens) {
        if (t.klass == Klass::Chunk) seen_chunk = true;
        if (seen_chunk) REQUIRE(t.klass == Klass::Chunk);
      }
      REQUIRE(!p.tokens.empty());
    }
    // boundary characterization
    std::vector<bool> starts(tokens.size(), false);
    pos = 0;
    for (const auto& p : phrases) {
      starts[pos] = true;
      pos += p.tokens.size();
    }
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const bool expected = tokens[i].klass == Klass::Chink &&
                            tokens[i - 1].klass == Klass::Chunk;
      REQUIRE(starts[i] == expected);
    }
  }
}

TEST_CASE("phrase_frame_ranges maps words onto frames") {
  auto one = parse_phrases(tokens_with_klass({0, 1}));
  REQUIRE(one.size() == 1);
  auto ranges = phrase_frame_ranges(one, {{0, 40}, {40, 90}});
  REQUIRE(ranges.size() == 1);
  CHECK(ranges[0] == std::pair<int, int>(0, 90));

  auto two = parse_phrases(tokens_with_klass({0, 1, 0, 1}));
  REQUIRE(two.size() == 2);
  auto ranges2 =
      phrase_frame_ranges(two, {{0, 20}, {20, 50}, {50, 80}, {80, 120}});
  REQUIRE(ranges2.size() == 2);
  CHECK(ranges2[0] == std::pair<int, int>(0, 50));
  CHECK(ranges2[1] == std::pair<int, int>(50, 120));

  CHECK_THROWS_AS(phrase_frame_ranges(one, {{0, 40}, {45, 90}}),
                  MissingAlignment);
  CHECK_THROWS_AS(phrase_frame_ranges(one, {{0, 40}, {30, 90}}), OverlapError);
  CHECK_THROWS_AS(phrase_frame_ranges(one, {{0, 40}}), MissingAlignment);
}

TEST_CASE("tokenize_line handles tags and punctuation") {
  auto tagged = tokens_from_line("He/PRP wanted/VBD a/DT turnip/NN .");
  REQUIRE(tagged.size() == 4);
  CHECK(tagged[0].pos == "PRP");
  CHECK(tagged[1].klass == Klass::Chink);
  CHECK(tagged[3].text == "turnip");

  auto quoted = tokens_from_line("\"I'm sorry.\"");
  REQUIRE(quoted.size() == 2);
  CHECK(quoted[0].text == "I'm");
  CHECK(quoted[0].klass == Klass::Chink);
  CHECK(quoted[1].klass == Klass::Chunk);

  CHECK(tokens_from_line("-- ... !!").empty());
}

TEST_CASE("lexicon override file replaces sections") {
  const char* path = "lexicon_override_test.txt";
  {
    std::ofstream out(path);
    out << "# test lexicon\n[function_words]\nzork\n[objective_pronouns]\n"
        << "blee\n";
  }
  Lexicon lex = Lexicon::load(path);
  CHECK(classify_token("zork", "", lex) == Klass::Chink);
  CHECK(classify_token("the", "", lex) == Klass::Chunk);  // replaced
  CHECK(classify_token("blee", "", lex) == Klass::Chunk);
  // untouched sections keep bundled content
  CHECK(classify_token("sat", "", lex) == Klass::Chink);
  std::remove(path);
  CHECK_THROWS_AS(Lexicon::load("no_such_lexicon_file.txt"), FileMissing);
}
