#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <set>

#include "rsor/group.hpp"
#include "rsor/oracles.hpp"
#include "rsor/prp.hpp"
#include "rsor/rng.hpp"

using namespace rsor;

namespace {

GroupElement toy(std::uint8_t v) { return GroupElement{Bytes{v}}; }

std::size_t popcount(ByteView b) {
  std::size_t n = 0;
  for (auto x : b) n += static_cast<std::size_t>(__builtin_popcount(x));
  return n;
}

}  // namespace

TEST_SUITE("crypto") {

TEST_CASE("toy group exponentiation by hand") {
  auto g = toy_group();
  CHECK(g->exp(toy(3), g->from_u64(2)) == toy(9));
  CHECK(g->exp(toy(3), g->from_u64(1)) == toy(3));
  CHECK(g->exp(toy(9), g->from_u64(2)) == toy(4));
  CHECK(g->exp(toy(9), g->from_u64(3)) == toy(3));
  CHECK(g->exp(toy(3), g->from_u64(4)) == toy(4));
  CHECK_FALSE(g->is_valid(view(Bytes{1})));
  CHECK_FALSE(g->is_valid(view(Bytes{2})));
  CHECK_THROWS_AS(g->exp(toy(2), g->from_u64(2)), DecodeError);
  CHECK_THROWS_AS(g->exp(toy(3), g->from_u64(5)), ArgumentError);
}

TEST_CASE("exponent law in both groups") {
  for (auto g : {toy_group(), ristretto255()}) {
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
      Scalar a = g->random_scalar(rng);
      Scalar b = g->random_scalar(rng);
      CHECK(g->exp(g->exp_g(a), b) == g->exp_g(g->mul(a, b)));
      CHECK(g->exp(g->exp_g(a), g->from_u64(1)) == g->exp_g(a));
    }
  }
}

TEST_CASE("ristretto encoding") {
  auto g = ristretto255();
  CHECK(g->element_len() == 32);
  CHECK(g->is_valid(g->generator().view()));
  CHECK_FALSE(g->is_valid(view(Bytes(32, 0))));
  CHECK_FALSE(g->is_valid(view(Bytes(31, 1))));
  CHECK(g->decode(g->generator().view()) == g->generator());
  CHECK(to_hex(g->generator().view()) ==
        "e2f2ae0a6abc4e71a884a961c500515f58e30b6aa582dd8db6a65945e08d2d76");
  CHECK(to_hex(g->exp_g(g->from_u64(5)).view()) ==
        "e882b131016b52c1d3337080187cf768423efccbb517bb495ab812c4160ff44e");
  CHECK_THROWS_AS(g->decode(view(Bytes(32, 0xff))), DecodeError);
  Rng rng(3);
  Scalar a = g->random_scalar(rng);
  CHECK(g->mul(a, g->invert(a)) == g->from_u64(1));
  CHECK(g->is_canonical(a));
}

TEST_CASE("h_b determinism, ordering and range") {
  auto g = ristretto255();
  GroupElement a = g->exp_g(g->from_u64(5));
  GroupElement s = g->exp_g(g->from_u64(7));
  CHECK(ro_hb(*g, a, s) == ro_hb(*g, a, s));
  CHECK_FALSE(ro_hb(*g, a, s) == ro_hb(*g, s, a));
  CHECK(to_hex(ro_hb(*g, a, s).view()) ==
        "6e755e2a4c53a29101d1eb16d16a3edc816073fc56d69af6749ad5fad0657f0c");

  Rng rng(4);
  std::size_t zeros = 0;
  for (int i = 0; i < 10000; ++i) {
    GroupElement x = g->exp_g(g->random_scalar(rng));
    if (g->is_zero(ro_hb(*g, x, s))) ++zeros;
  }
  CHECK(zeros == 0);

  auto t = toy_group();
  for (std::uint8_t x : {3, 9, 5, 4}) {
    for (std::uint8_t y : {3, 9, 5, 4}) CHECK_FALSE(t->is_zero(ro_hb(*t, toy(x), toy(y))));
  }
}

TEST_CASE("symmetric oracles are domain separated") {
  auto g = ristretto255();
  GroupElement s = g->exp_g(g->from_u64(7));
  Bytes r = ro_hsym(OracleTag::rho, s, 16);
  Bytes m = ro_hsym(OracleTag::mu, s, 16);
  Bytes p = ro_hsym(OracleTag::pi, s, 16);
  CHECK(r != m);
  CHECK(m != p);
  CHECK(r != p);
  CHECK(r == ro_hsym(OracleTag::rho, s, 16));
  CHECK(r.size() == 16);
  CHECK(ro_hsym(OracleTag::rho, s, 32).size() == 32);
  CHECK(ro_hstar(s, 16) == concat({r, m, p}));
  CHECK(to_hex(r) == "9f78534c9ad865b7c2e3b14cbac18afa");
}

TEST_CASE("prg stream properties") {
  Bytes k(16, 0x42);
  CHECK(prg(k, 0, 100).empty());
  Bytes a = prg(k, 16, 100);
  Bytes b = prg(k, 48, 100);
  CHECK(Bytes(b.begin(), b.begin() + 16) == a);
  CHECK_THROWS_AS(prg(k, 101, 100), ArgumentError);
  CHECK(to_hex(b) ==
        "da6983b56ec420f8e2a39d3440a6e409e16b73e8bf56e03e62c310feb40733fc"
        "d069336dbe5e3431ff11b93504240a25");

  Bytes big = keystream(k, 100000);
  const double bits = 800000.0;
  const double ones = static_cast<double>(popcount(big));
  CHECK(std::abs(ones - bits / 2) <= 3 * std::sqrt(bits) / 2);
}

TEST_CASE("mac") {
  Bytes k(16, 7);
  Bytes m = to_bytes("attack at dawn");
  CHECK(mac(k, m) == mac(k, m));
  CHECK(mac(k, m).size() == 16);
  for (std::size_t i = 0; i < m.size() * 8; ++i) {
    Bytes m2 = m;
    m2[i / 8] ^= static_cast<std::uint8_t>(1u << (i % 8));
    CHECK(mac(k, m2) != mac(k, m));
  }
  CHECK(mac_verify(k, m, mac(k, m)));
  CHECK_FALSE(mac_verify(k, m, Bytes(16, 0)));
}

TEST_CASE("lioness round trip and length checks") {
  Rng rng(5);
  for (std::size_t len : {2u, 8u, 63u, 64u, 65u, 1024u}) {
    Bytes key = rng.bytes(16);
    Bytes x = rng.bytes(len);
    Bytes c = prp_enc(key, x, len);
    CHECK(c.size() == len);
    CHECK(c != x);
    CHECK(prp_dec(key, c, len) == x);
    CHECK(prp_enc(key, prp_dec(key, x, len), len) == x);
  }
  CHECK_THROWS_AS(prp_enc(Bytes(16, 1), Bytes(10, 0), 11), ArgumentError);
  CHECK_THROWS_AS(prp_dec(Bytes(16, 1), Bytes(10, 0), 11), ArgumentError);
  Bytes x(1024, 9);
  CHECK(prp_enc(Bytes(16, 1), x, 1024) != prp_enc(Bytes(16, 2), x, 1024));
}

TEST_CASE("lioness is a bijection on 8-byte blocks") {
  Lioness prp(Bytes(16, 3));
  Rng rng(6);
  std::set<Bytes> inputs;
  std::set<Bytes> outputs;
  while (inputs.size() < (1u << 16)) {
    Bytes x = rng.bytes(8);
    if (inputs.insert(x).second) outputs.insert(prp.encrypt(x));
  }
  CHECK(outputs.size() == inputs.size());
}

TEST_CASE("single bit flips never survive the zero prefix") {
  Rng rng(7);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) {
    Bytes key = rng.bytes(16);
    Bytes plain(1024, 0);
    rng.fill(std::span<std::uint8_t>(plain).subspan(16));
    Bytes c = prp_enc(key, plain, 1024);
    std::size_t bit = rng.uniform(1024 * 8);
    c[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    Bytes d = prp_dec(key, c, 1024);
    if (is_all_zero(ByteView(d).first(16))) ++hits;
  }
  CHECK(hits == 0);
}

TEST_CASE("tagged decryption looks uniform") {
  Rng rng(8);
  std::array<double, 256> hist{};
  const int trials = 2000;
  for (int i = 0; i < trials; ++i) {
    Bytes key = rng.bytes(16);
    Bytes c = rng.bytes(1024);
    Bytes mask(1024, 0);
    mask[rng.uniform(1024)] = static_cast<std::uint8_t>(1 + rng.uniform(255));
    xor_into(c, mask);
    for (auto b : prp_dec(key, c, 1024)) hist[b] += 1;
  }
  const double expect = trials * 1024.0 / 256.0;
  double chi2 = 0;
  for (double h : hist) chi2 += (h - expect) * (h - expect) / expect;
  boost::math::chi_squared dist(255);
  CHECK(boost::math::cdf(complement(dist, chi2)) > 0.01);
}

TEST_CASE("rng determinism and forks") {
  Rng a(1), b(1), c(2);
  CHECK(a.bytes(40) == b.bytes(40));
  CHECK(Rng(1).bytes(40) != c.bytes(40));
  Rng f1 = a.fork("x");
  Rng f2 = a.fork("x");
  Rng f3 = a.fork("y");
  CHECK(f1.bytes(16) == f2.bytes(16));
  CHECK(a.fork("x").bytes(16) != f3.bytes(16));
  CHECK_THROWS_AS(a.uniform(0), ArgumentError);
  for (int i = 0; i < 1000; ++i) CHECK(a.uniform(7) < 7);
}

}  // TEST_SUITE
