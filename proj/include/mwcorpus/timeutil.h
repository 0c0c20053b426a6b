#ifndef MWCORPUS_TIMEUTIL_H_
#define MWCORPUS_TIMEUTIL_H_

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

namespace mwcorpus {

// "YYYY-MM-DDTHH:MM:SSZ" for the given instant.
std::string FormatUtc(std::chrono::system_clock::time_point t);
std::string UtcNowIso();

// True for "YYYY-MM-DDTHH:MM:SSZ" with in-range fields.
bool IsIsoUtc(std::string_view s);

using Clock = std::function<std::string()>;

}  // namespace mwcorpus

#endif  // MWCORPUS_TIMEUTIL_H_
