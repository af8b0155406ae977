#pragma once

#include <stdexcept>
#include <string>

namespace cpt {

// Bad input: malformed files, out-of-range parameters, broken preconditions.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : ValidationError {
  int line;
  ParseError(int line_, const std::string& what_)
      : ValidationError("line " + std::to_string(line_) + ": " + what_), line(line_) {}
};

// A configured resource bound was exceeded (bandwidth, rounds, problem size).
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BandwidthError : ResourceError {
  int from, to, round, bits, budget;
  BandwidthError(int from_, int to_, int round_, int bits_, int budget_)
      : ResourceError("bandwidth exceeded on edge (" + std::to_string(from_) + "," +
                      std::to_string(to_) + ") in round " + std::to_string(round_) + ": " +
                      std::to_string(bits_) + " bits > budget " + std::to_string(budget_)),
        from(from_), to(to_), round(round_), bits(bits_), budget(budget_) {}
};

struct RoundLimitError : ResourceError {
  long long rounds;
  explicit RoundLimitError(long long rounds_)
      : ResourceError("protocol did not halt within " + std::to_string(rounds_) + " rounds"),
        rounds(rounds_) {}
};

}  // namespace cpt
