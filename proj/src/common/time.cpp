#include "moodifier/common/time.hpp"

#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "moodifier/common/error.hpp"

namespace moodifier {

namespace {

int read_digits(std::string_view text, std::size_t pos, std::size_t count) {
  if (pos + count > text.size()) {
    throw Error(Errc::InvalidArgument, fmt::format("truncated timestamp '{}'", text));
  }
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + count, value);
  if (ec != std::errc{} || ptr != text.data() + pos + count) {
    throw Error(Errc::InvalidArgument, fmt::format("malformed timestamp '{}'", text));
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw Error(Errc::InvalidArgument,
                fmt::format("malformed timestamp '{}': expected '{}' at {}", text, c, pos));
  }
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  const int y = read_digits(text, 0, 4);
  expect(text, 4, '-');
  const int mo = read_digits(text, 5, 2);
  expect(text, 7, '-');
  const int d = read_digits(text, 8, 2);
  expect(text, 10, 'T');
  const int h = read_digits(text, 11, 2);
  expect(text, 13, ':');
  const int mi = read_digits(text, 14, 2);
  expect(text, 16, ':');
  const int s = read_digits(text, 17, 2);
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  expect(text, pos, 'Z');
  if (pos + 1 != text.size()) {
    throw Error(Errc::InvalidArgument, fmt::format("trailing characters in timestamp '{}'", text));
  }

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    throw Error(Errc::InvalidArgument, fmt::format("out-of-range timestamp '{}'", text));
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_start = floor<std::chrono::days>(t);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{t - day_start};
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

Timestamp utc_now() {
  return std::chrono::floor<Seconds>(std::chrono::system_clock::now());
}

}  // namespace moodifier
