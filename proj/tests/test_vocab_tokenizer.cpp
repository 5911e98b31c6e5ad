#include "cascade/errors.hpp"
#include "cascade/tokenizer.hpp"
#include "cascade/vocab.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>

using namespace cascade;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("vocabulary ranks by frequency then lexicographically") {
  const Vocab v = Vocab::build({"a b", "a"}, 6);
  CHECK(v.size() == 6);
  CHECK(v.id_of("a") == 4);
  CHECK(v.id_of("b") == 5);

  const Vocab ties = Vocab::build({"q p"}, 6);
  CHECK(ties.id_of("p") == 4);
  CHECK(ties.id_of("q") == 5);
}

TEST_CASE("vocabulary construction is deterministic") {
  const Vocab a = Vocab::build({"x y z x", "w y"}, 10);
  const Vocab b = Vocab::build({"x y z x", "w y"}, 10);
  CHECK(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.token_of(static_cast<std::int32_t>(i)) == b.token_of(static_cast<std::int32_t>(i)));
  }
}

TEST_CASE("vocabulary caps size and falls back to UNK") {
  const Vocab v = Vocab::build({"a a a b b c"}, 6);
  CHECK(v.size() == 6);
  CHECK(v.id_of("a") == 4);
  CHECK(v.id_of("b") == 5);
  CHECK(v.id_of("c") == Vocab::kUnk);
  CHECK(v.id_of("zzz") == Vocab::kUnk);
}

TEST_CASE("vocabulary rejects degenerate inputs") {
  CHECK_THROWS_AS(Vocab::build({"a"}, 4), UsageError);
  CHECK_THROWS_AS(Vocab::build({"", "  ,,"}, 10), DataError);
}

TEST_CASE("vocabulary round-trips through its file format") {
  const Vocab v = Vocab::build({"alpha beta gamma alpha"}, 12);
  const auto path = temp_file("cascade_vocab_roundtrip.txt");
  v.save(path);
  const Vocab r = Vocab::load(path);
  CHECK(r.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto id = static_cast<std::int32_t>(i);
    CHECK(r.token_of(id) == v.token_of(id));
    CHECK(r.id_of(v.token_of(id)) == id);
  }
  std::filesystem::remove(path);
}

TEST_CASE("query tokenization layout") {
  const Vocab v = Vocab::build({"heart attack risk"}, 10);
  SUBCASE("empty text") {
    const TokenSequence s = tokenize_query(v, "", 6);
    CHECK(s.ids == std::vector<std::int32_t>{Vocab::kCls, Vocab::kSep, Vocab::kPad, Vocab::kPad,
                                             Vocab::kPad, Vocab::kPad});
    CHECK(s.mask_len == 2);
  }
  SUBCASE("known words") {
    const TokenSequence s = tokenize_query(v, "Heart attack", 6);
    CHECK(s.ids[0] == Vocab::kCls);
    CHECK(s.ids[1] == v.id_of("heart"));
    CHECK(s.ids[2] == v.id_of("attack"));
    CHECK(s.ids[3] == Vocab::kSep);
    CHECK(s.ids[4] == Vocab::kPad);
    CHECK(s.mask_len == 4);
  }
  SUBCASE("long text truncates to max_len with terminal SEP") {
    std::string text;
    for (int i = 0; i < 100; ++i) text += "heart ";
    const TokenSequence s = tokenize_query(v, text, 8);
    CHECK(s.ids.size() == 8);
    CHECK(s.ids[7] == Vocab::kSep);
    CHECK(s.mask_len == 8);
  }
}

TEST_CASE("document tokenization keeps both separators") {
  const Vocab v = Vocab::build({"title words abstract body text"}, 12);
  SUBCASE("empty abstract") {
    const TokenSequence s = tokenize_document(v, "title words", "", 8);
    CHECK(s.ids[0] == Vocab::kCls);
    CHECK(s.ids[1] == v.id_of("title"));
    CHECK(s.ids[2] == v.id_of("words"));
    CHECK(s.ids[3] == Vocab::kSep);
    CHECK(s.ids[4] == Vocab::kSep);
    CHECK(s.ids[5] == Vocab::kPad);
    CHECK(s.mask_len == 5);
  }
  SUBCASE("abstract truncated before title") {
    const TokenSequence s = tokenize_document(v, "title words", "abstract body text", 7);
    // budget 4 after CLS/SEP/SEP: title keeps 2, abstract keeps 2
    CHECK(s.ids[1] == v.id_of("title"));
    CHECK(s.ids[2] == v.id_of("words"));
    CHECK(s.ids[3] == Vocab::kSep);
    CHECK(s.ids[4] == v.id_of("abstract"));
    CHECK(s.ids[5] == v.id_of("body"));
    CHECK(s.ids[6] == Vocab::kSep);
    CHECK(s.mask_len == 7);
  }
  SUBCASE("oversized title still ends with both separators") {
    const TokenSequence s = tokenize_document(v, "title words abstract body text", "body", 5);
    CHECK(s.ids[0] == Vocab::kCls);
    CHECK(s.ids[1] == v.id_of("title"));
    CHECK(s.ids[2] == v.id_of("words"));
    CHECK(s.ids[3] == Vocab::kSep);
    CHECK(s.ids[4] == Vocab::kSep);
    CHECK(s.mask_len == 5);
  }
}

TEST_CASE("pair tokenization truncates the document before the query") {
  const Vocab v = Vocab::build({"q1 q2 q3 d1 d2 d3 d4"}, 16);
  const TokenSequence s = tokenize_pair(v, "q1 q2", "d1 d2", "d3 d4", 8, 9);
  // CLS q1 q2 SEP d1 d2 d3 SEP -> 9 with one pad? budget: 9-3-2 = 4 doc slots
  CHECK(s.ids[0] == Vocab::kCls);
  CHECK(s.ids[1] == v.id_of("q1"));
  CHECK(s.ids[2] == v.id_of("q2"));
  CHECK(s.ids[3] == Vocab::kSep);
  CHECK(s.ids[4] == v.id_of("d1"));
  CHECK(s.ids[5] == v.id_of("d2"));
  CHECK(s.ids[6] == v.id_of("d3"));
  CHECK(s.ids[7] == v.id_of("d4"));
  CHECK(s.ids[8] == Vocab::kSep);
  CHECK(s.mask_len == 9);

  // Tight budget: document loses tokens first, query survives.
  const TokenSequence t = tokenize_pair(v, "q1 q2 q3", "d1 d2 d3 d4", "", 8, 7);
  CHECK(t.ids[1] == v.id_of("q1"));
  CHECK(t.ids[2] == v.id_of("q2"));
  CHECK(t.ids[3] == v.id_of("q3"));
  CHECK(t.ids[4] == Vocab::kSep);
  CHECK(t.ids[5] == v.id_of("d1"));
  CHECK(t.ids[6] == Vocab::kSep);
  CHECK(t.mask_len == 7);
}
