#include <doctest.h>

#include "decoynet/rng.hpp"

using namespace decoynet;

// Frozen vectors, computed independently; these pin the seed-splitting scheme
// documented in the README.
TEST_CASE("splitmix64 output function") {
  CHECK(mix64(0) == 16294208416658607535ULL);
  CHECK(mix64(1) == 10451216379200822465ULL);
}

TEST_CASE("fnv1a64") {
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(fnv1a64("topology") == 5864118022096940260ULL);
}

TEST_CASE("seed derivation vectors") {
  CHECK(derive_seed(42, 0, "topology") == 8094778452564932255ULL);
  CHECK(derive_seed(42, 1, "topology") == 12852147460584410234ULL);
  CHECK(derive_seed(42, 0, "vulns") == 12102419814029268228ULL);
}

TEST_CASE("splitmix64 stream") {
  SplitMix64 rng(12345);
  CHECK(rng.next_u64() == 2454886589211414944ULL);
  CHECK(rng.next_u64() == 3778200017661327597ULL);
  CHECK(rng.next_u64() == 2205171434679333405ULL);
}

TEST_CASE("unit doubles are in range and reproducible") {
  SplitMix64 a(999);
  SplitMix64 b(999);
  for (int i = 0; i < 1000; ++i) {
    double u = a.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.next_unit());
  }
}

TEST_CASE("bounded draws stay in range") {
  SplitMix64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.next_below(13) < 13);
    int v = rng.next_int(-3, 9);
    CHECK(v >= -3);
    CHECK(v <= 9);
  }
}
