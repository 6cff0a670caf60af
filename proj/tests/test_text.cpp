#include <doctest.h>

#include <random>

#include "quizforge/text.hpp"

using namespace quizforge::text;

TEST_CASE("utf8 decode and encode round trip") {
  const std::string s = "aç İ 🙂 \xF0\x9F\x87\xB9\xF0\x9F\x87\xB7";
  CHECK(encode_utf8(decode_utf8(s)) == s);
  CHECK(decode_utf8("ı").size() == 1);
  CHECK(decode_utf8("🙂") == U"🙂");
}

TEST_CASE("malformed utf8 decodes to replacement characters") {
  const auto cps = decode_utf8("a\xFF" "b\xC3");
  REQUIRE(cps.size() == 4);
  CHECK(cps[0] == U'a');
  CHECK(cps[1] == 0xFFFD);
  CHECK(cps[2] == U'b');
  CHECK(cps[3] == 0xFFFD);
  CHECK(sanitize("x\xFFy") == "x\xEF\xBF\xBDy");
}

TEST_CASE("nfc composes decomposed text") {
  CHECK(nfc("e\xCC\x81") == "é");
  CHECK(nfc("c\xCC\xA7") == "ç");
  CHECK(nfc("çok") == "çok");
}

TEST_CASE("turkish lowercase handles dotted and dotless i") {
  CHECK(turkish_lower("İSTANBUL") == "istanbul");
  CHECK(turkish_lower("ISPARTA") == "ısparta");
  CHECK(turkish_lower("IĞDIR") == "ığdır");
  CHECK(turkish_lower("I\xCC\x87zmir") == "izmir");
  CHECK(turkish_lower("ÇÖŞÜĞ") == "çöşüğ");
  CHECK(turkish_lower("Straße") == "straße");
}

TEST_CASE("word tokens split on punctuation, whitespace tokens do not") {
  const auto words = word_tokens("yüz-yıl, 1923!");
  CHECK(words == std::vector<std::string>{"yüz", "yıl", "1923"});
  CHECK(whitespace_tokens("yüz-yıl, 1923!") == std::vector<std::string>{"yüz-yıl,", "1923!"});
  CHECK(word_tokens("Atatürk'ün") == std::vector<std::string>{"Atatürk", "ün"});
  CHECK(word_tokens("  ").empty());
  CHECK(whitespace_tokens("a b\tc\nd").size() == 4);
}

TEST_CASE("combining marks stay with their run") {
  CHECK(word_tokens("e\xCC\x81t ok") == std::vector<std::string>{"e\xCC\x81t", "ok"});
  CHECK(word_tokens("\xCC\x81x") == std::vector<std::string>{"x"});
}

TEST_CASE("count_word_tokens agrees with word_tokens") {
  const std::vector<std::string> pieces = {"a", "İ", "ş", " ", "-", "1", "🙂", "\xCC\x81", ",", "\n", "ğü"};
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  for (int round = 0; round < 500; ++round) {
    std::string s;
    for (int i = 0; i < 15; ++i) s += pieces[pick(rng)];
    CHECK(count_word_tokens(s) == word_tokens(s).size());
  }
}

TEST_CASE("character classes") {
  CHECK(is_emoji(U'🙂'));
  CHECK(is_emoji(0x1F3FB));
  CHECK(is_emoji(0x200D));
  CHECK_FALSE(is_emoji(U'a'));
  CHECK_FALSE(is_emoji(U'ş'));
  CHECK(is_space(0x00A0));
  CHECK(is_control(0x0007));
  CHECK_FALSE(is_control(U'x'));
  CHECK(is_alnum(U'ı'));
  CHECK(is_alnum(U'٣'));
}

TEST_CASE("trim, blank and line helpers") {
  CHECK(trim("  a b \n") == "a b");
  CHECK(is_blank(" \t\n"));
  CHECK_FALSE(is_blank(" x "));
  CHECK(split_lines("a\nb\n\nc").size() == 4);
  CHECK(starts_with_icase("HTTPS://x", "https://"));
  CHECK_FALSE(starts_with_icase("ht", "https"));
}
