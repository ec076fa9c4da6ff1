#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "seglock/oracle.hpp"
#include "seglock/simd.hpp"

using namespace seglock;
using namespace seglock::simd;

namespace {

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Sizes straddle the 4-lane width so tails are exercised.
constexpr std::size_t kSizes[] = {0, 1, 3, 4, 5, 7, 8, 13, 64, 257};

}  // namespace

TEST_CASE("scalar kernels are always available") {
  CHECK(isa_supported(Isa::Scalar));
  CHECK(kernels_for(Isa::Scalar).isa == Isa::Scalar);
  MESSAGE("active kernels: " << to_string(kernels().isa));
}

TEST_CASE("iou_one_to_many agrees with core iou bit-for-bit") {
  SplitMix64 rng(3);
  for (std::size_t n : kSizes) {
    std::vector<double> s(n), e(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.uniform() * 3;
      e[i] = s[i] + (i % 5 == 0 ? 0.0 : rng.uniform());  // some degenerate
    }
    const double qs = 1.0, qe = 2.0;
    kernels_for(Isa::Scalar).iou_one_to_many(qs, qe, s.data(), e.data(), out.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == iou({qs, qe, 0}, {s[i], e[i], 0}));
  }
}

TEST_CASE("AVX2 kernels are bit-identical to scalar kernels") {
  if (!isa_supported(Isa::Avx2)) {
    MESSAGE("AVX2 unavailable on this host; equivalence not exercised");
    return;
  }
  const Kernels& ref = kernels_for(Isa::Scalar);
  const Kernels& vec = kernels_for(Isa::Avx2);
  SplitMix64 rng(99);
  for (int round = 0; round < 50; ++round) {
    for (std::size_t n : kSizes) {
      std::vector<double> a(n), b(n), ta(n), tb(n);
      std::vector<std::uint8_t> mask(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.uniform() < 0.1 ? 0.0 : rng.uniform() * 0.5;
        b[i] = rng.uniform() < 0.1 ? 0.0 : rng.uniform() * 0.5;
        ta[i] = rng.uniform() < 0.05 ? a[i] : rng.uniform() * 0.5;  // exact ties
        tb[i] = rng.uniform() * 0.5;
        mask[i] = rng.uniform() < 0.7 ? 1 : 0;
      }

      std::vector<double> o1(n), o2(n);
      ref.iou_one_to_many(0.1, 0.4, a.data(), ta.data(), o1.data(), n);
      vec.iou_one_to_many(0.1, 0.4, a.data(), ta.data(), o2.data(), n);
      CHECK(bit_equal(o1, o2));

      std::vector<double> l1(n), gs1(n), ge1(n), l2(n), gs2(n), ge2(n);
      ref.diou_frames(a.data(), b.data(), ta.data(), tb.data(), mask.data(), l1.data(), gs1.data(),
                      ge1.data(), n);
      vec.diou_frames(a.data(), b.data(), ta.data(), tb.data(), mask.data(), l2.data(), gs2.data(),
                      ge2.data(), n);
      CHECK(bit_equal(l1, l2));
      CHECK(bit_equal(gs1, gs2));
      CHECK(bit_equal(ge1, ge2));

      std::vector<double> s1(n), e1(n), s2(n), e2(n);
      std::vector<std::uint8_t> k1(n), k2(n);
      ref.decode_bounds(0.04, 0.5, a.data(), b.data(), mask.data(), s1.data(), e1.data(),
                        k1.data(), n);
      vec.decode_bounds(0.04, 0.5, a.data(), b.data(), mask.data(), s2.data(), e2.data(),
                        k2.data(), n);
      CHECK(bit_equal(s1, s2));
      CHECK(bit_equal(e1, e2));
      CHECK(k1 == k2);
    }
  }
}

TEST_CASE("diou kernel zeroes masked frames and handles degenerate predictions") {
  const double a[] = {0.0, 0.2, 0.3};
  const double b[] = {0.0, 0.2, 0.3};
  const double ta[] = {0.1, 0.2, 0.1};
  const double tb[] = {0.1, 0.2, 0.1};
  const std::uint8_t mask[] = {1, 1, 0};
  double loss[3], gs[3], ge[3];
  scalar::diou_frames(a, b, ta, tb, mask, loss, gs, ge, 3);
  CHECK(loss[0] == 1.0);  // IoU 0, same centers
  CHECK(std::isfinite(gs[0]));
  CHECK(loss[1] == 0.0);  // identical
  CHECK(loss[2] == 0.0);
  CHECK(gs[2] == 0.0);
  CHECK(ge[2] == 0.0);
}

TEST_CASE("decode_bounds clamps to the video and drops empty frames") {
  const double so[] = {0.1, 0.0, 0.0, 5.0};
  const double eo[] = {0.1, 0.0, 9.0, 0.0};
  const std::uint8_t valid[] = {1, 1, 1, 0};
  double s[4], e[4];
  std::uint8_t keep[4];
  scalar::decode_bounds(1.0, 2.0, so, eo, valid, s, e, keep, 4);
  CHECK(s[0] == doctest::Approx(0.4));
  CHECK(e[0] == doctest::Approx(0.6));
  CHECK(keep[0] == 1);
  CHECK(keep[1] == 0);
  CHECK(s[2] == 2.0);  // center 2.5 clamps to the duration
  CHECK(keep[2] == 0);
  CHECK(keep[3] == 0);
}
