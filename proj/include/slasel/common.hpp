#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slasel {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Variant { Maximize, Minimize };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  /// Same error with `context` (typically a file name) prepended.
  ParseError(const std::string& context, const ParseError& inner)
      : Error(context + ": " + inner.what()), line_(inner.line_) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Engine output is fixed by the standard; the distribution helpers below are
// written out so results do not depend on the standard library vendor.
using Rng = std::mt19937_64;

std::uint64_t uniform_int(Rng& rng, std::uint64_t lo, std::uint64_t hi);
double uniform01(Rng& rng);
double standard_normal(Rng& rng);

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = uniform_int(rng, 0, i - 1);
    std::swap(v[i - 1], v[j]);
  }
}

/// Derives an independent stream seed from a base seed and a salt.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

double mean(std::span<const double> xs);
/// Population standard deviation.
double stddev(std::span<const double> xs);
double median(std::vector<double> xs);
/// Linear-interpolated quantile (the usual "type 7" definition).
double quantile(std::vector<double> xs, double q);
/// Pearson correlation; 0 when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace slasel
