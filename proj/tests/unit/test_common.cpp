#include <doctest.h>

#include <string>

#include "cage/codec.hpp"
#include "cage/error.hpp"
#include "cage/subprocess.hpp"
#include "cage/text.hpp"

using namespace cage;

TEST_CASE("base64 round trip across padding lengths") {
  std::vector<std::uint8_t> bytes;
  for (int n = 0; n < 12; ++n) {
    const auto enc = codec::base64_encode(bytes);
    CHECK(enc.size() % 4 == 0);
    CHECK(codec::base64_decode(enc) == bytes);
    bytes.push_back(static_cast<std::uint8_t>(n * 37 + 1));
  }
  const std::string_view hello("hello");
  const std::span<const std::uint8_t> hb(reinterpret_cast<const std::uint8_t*>(hello.data()), hello.size());
  CHECK(codec::base64_encode(hb) == "aGVsbG8=");
  CHECK(codec::base64_decode("aGVs\nbG8=").size() == 5);
  CHECK_THROWS_AS(codec::base64_decode("a$=="), ParseError);
  CHECK_THROWS_AS(codec::base64_decode("aGVsbG8=x"), ParseError);
}

TEST_CASE("crc32 and seed derivation") {
  CHECK(codec::crc32(std::string_view("123456789")) == 0xCBF43926u);
  CHECK(codec::derive_seed(7, "bio-001") == codec::derive_seed(7, "bio-001"));
  CHECK(codec::derive_seed(7, "bio-001") != codec::derive_seed(7, "bio-002"));
  CHECK(codec::derive_seed(7, "bio-001") != codec::derive_seed(8, "bio-001"));
}

TEST_CASE("text helpers") {
  CHECK(text::normalize_whitespace("  small \t\n intestine ") == "small intestine");
  CHECK(text::fold("Small  INTESTINE") == "small intestine");
  CHECK(text::fold("ÉCLAIR") == "éclair");
  CHECK(text::decode_utf8("aé中").size() == 3);
  CHECK(text::encode_utf8(text::decode_utf8("aé中")) == "aé中");
  CHECK(text::decode_utf8("\xff") == std::u32string(1, U'�'));
  CHECK(text::split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(text::join({"a", "b"}, ", ") == "a, b");
}

TEST_CASE("subprocess runs, captures and times out") {
  SubprocessSpec ok;
  ok.shell_command = "read x; echo \"got $x\"; echo err >&2";
  ok.stdin_data = "hi\n";
  ok.limits.isolate_network = false;
  const auto r = run_subprocess(ok);
  CHECK(r.ok());
  CHECK(r.stdout_text == "got hi\n");
  CHECK(r.stderr_text == "err\n");

  SubprocessSpec slow;
  slow.shell_command = "sleep 5";
  slow.limits.timeout = std::chrono::milliseconds(200);
  slow.limits.isolate_network = false;
  const auto s = run_subprocess(slow);
  CHECK(s.timed_out);
  CHECK(s.wall < std::chrono::seconds(3));

  SubprocessSpec fail;
  fail.shell_command = "exit 4";
  fail.limits.isolate_network = false;
  CHECK(run_subprocess(fail).exit_code == 4);

  CHECK(expand_command_template("cat {in} > {out}", {{"in", "a b"}, {"out", "o"}}) == "cat 'a b' > 'o'");
  CHECK(shell_quote("it's") == "'it'\\''s'");
}
