#ifndef BITEXT_COMMON_HPP
#define BITEXT_COMMON_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bitext {

// Runtime failure (CLI exit code 1).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad usage, bad configuration or malformed input (CLI exit code 2).
struct UsageError : Error {
  using Error::Error;
};

// splitmix64 finalizer; used to derive independent stream seeds.
inline uint64_t mix_bits(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for a sub-stream, e.g. mix_seed(run_seed, epoch).
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  return mix_bits(seed ^ mix_bits(stream));
}

// Seeded RNG with implementation-pinned sampling helpers so results are
// reproducible across standard library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Unbiased integer in [0, n) by rejection.
  uint64_t below(uint64_t n) {
    if (n == 0) throw Error("Rng::below: n must be positive");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Log levels selected through the BITEXT_LOG environment variable.
enum class LogLevel { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kOff = 4 };

LogLevel log_level();
void set_log_level(LogLevel level);
void log_message(LogLevel level, const std::string& msg);

inline void log_debug(const std::string& msg) { log_message(LogLevel::kDebug, msg); }
inline void log_info(const std::string& msg) { log_message(LogLevel::kInfo, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::kWarn, msg); }
inline void log_error(const std::string& msg) { log_message(LogLevel::kError, msg); }

}  // namespace bitext

#endif  // BITEXT_COMMON_HPP
