#include "mwcorpus/timeutil.h"

#include <cctype>
#include <ctime>

namespace mwcorpus {

std::string FormatUtc(std::chrono::system_clock::time_point t) {
  const std::time_t seconds = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&seconds, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string UtcNowIso() { return FormatUtc(std::chrono::system_clock::now()); }

bool IsIsoUtc(std::string_view s) {
  if (s.size() != 20) return false;
  static constexpr std::string_view kShape = "dddd-dd-ddTdd:dd:ddZ";
  for (size_t i = 0; i < s.size(); ++i) {
    if (kShape[i] == 'd') {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    } else if (s[i] != kShape[i]) {
      return false;
    }
  }
  auto field = [&](size_t pos, size_t len) { return std::stoi(std::string(s.substr(pos, len))); };
  const int month = field(5, 2), day = field(8, 2), hour = field(11, 2), minute = field(14, 2),
            second = field(17, 2);
  return month >= 1 && month <= 12 && day >= 1 && day <= 31 && hour <= 23 && minute <= 59 &&
         second <= 60;
}

}  // namespace mwcorpus
