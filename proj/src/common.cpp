#include "coref_meter/errors.hpp"
#include "coref_meter/parallel.hpp"
#include "coref_meter/rng.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <string>

namespace corefmeter {

ParseError::ParseError(std::string file, std::size_t line, std::size_t column, const std::string& message)
    : InputError(fmt::format("{}:{}:{}: {}", file, line, column, message)),
      file_(std::move(file)),
      line_(line),
      column_(column),
      message_(message) {}

void Diagnostics::merge(const Diagnostics& other) {
  warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
  for (const auto& [key, n] : other.counters) counters[key] += n;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t default_thread_count() {
  const char* env = std::getenv("COREF_METER_THREADS");
  if (!env || !*env) return 1;
  std::size_t n = 0;
  const auto [end, ec] = std::from_chars(env, env + std::strlen(env), n);
  if (ec != std::errc() || *end != '\0' || n == 0) {
    throw InputError(fmt::format("COREF_METER_THREADS must be a positive integer, got '{}'", env));
  }
  return n;
}

}  // namespace corefmeter
