// Wide integer counters for shortest-path multiplicities.
//
// Decoy copies multiply the number of equal-cost paths per vertex pair, so
// counts can grow as a product over path interiors. All arithmetic is kept in
// 128 bits and checked; an overflow is a hard error, never a silent wrap.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace decoynet {

using PathCount = unsigned __int128;

class CountOverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline PathCount checked_add(PathCount a, PathCount b) {
  PathCount r = a + b;
  if (r < a) {
    throw CountOverflowError("path count overflow in 128-bit addition");
  }
  return r;
}

inline PathCount checked_mul(PathCount a, PathCount b) {
  if (a == 0 || b == 0) {
    return 0;
  }
  PathCount r = a * b;
  if (r / a != b) {
    throw CountOverflowError("path count overflow in 128-bit multiplication");
  }
  return r;
}

inline std::uint64_t to_u64_checked(PathCount v) {
  if (v > PathCount(UINT64_MAX)) {
    throw CountOverflowError("path count does not fit in 64 bits");
  }
  return static_cast<std::uint64_t>(v);
}

inline double to_double(PathCount v) { return static_cast<double>(v); }

inline std::string count_to_string(PathCount v) {
  if (v == 0) {
    return "0";
  }
  std::string out;
  while (v > 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return {out.rbegin(), out.rend()};
}

}  // namespace decoynet
