#include <doctest.h>

#include <nlohmann/json.hpp>

#include "embz/errors.hpp"
#include "embz/spectrum.hpp"
#include "support.hpp"

using namespace embz;
using doctest::Approx;

namespace {

Spectrum S(std::vector<double> w) { return make_spectrum(w); }

void check_invariants(const Spectrum& s) {
  const auto lv = s.levels();
  for (std::size_t i = 0; i < lv.size(); ++i) {
    CHECK(lv[i].weight > 0.0);
    CHECK(lv[i].count >= 1);
    if (i > 0) CHECK(lv[i].weight < lv[i - 1].weight);
  }
  CHECK(ref::mass(s) == Approx(1.0).epsilon(1e-10));
  CHECK(s.tail_mass() >= 0.0);
  if (s.tail_mass() == 0.0) CHECK(s.tail_atom_bound() == 0.0);
  if (s.tail_mass() > 0.0 && s.level_count() > 0) CHECK(s.tail_atom_bound() <= s.min_weight());
}

}  // namespace

TEST_SUITE("spectra") {
  TEST_CASE("make_spectrum sorts and keeps the tail honest") {
    const Spectrum a = S({0.4, 0.6});
    CHECK(a.weights() == std::vector<double>{0.6, 0.4});
    CHECK(a.tail_mass() == 0.0);

    CHECK(S({1.0}).weights() == std::vector<double>{1.0});

    const Spectrum c = S({0.5, 0.5, -1e-12});
    CHECK(c.weights() == std::vector<double>{0.5, 0.5});
    CHECK(c.tail_mass() < 1e-11);
    CHECK(c.atom_count() == 2);
    CHECK(c.level_count() == 1);

    // Deficit goes to the tail, no renormalization.
    const Spectrum d = make_spectrum(std::vector<double>{0.6, 0.3999}, 1e-3);
    CHECK(d.weights() == std::vector<double>{0.6, 0.3999});
    CHECK(d.tail_mass() == Approx(1e-4).epsilon(1e-9));
    check_invariants(d);

    // Entries at or below tol are dropped into the tail.
    const Spectrum e = make_spectrum(std::vector<double>{0.7, 0.3 - 1e-10, 1e-10}, 1e-9);
    CHECK(e.atom_count() == 2);
    CHECK(e.tail_mass() == Approx(1e-10).epsilon(1e-4));
    CHECK(e.tail_atom_bound() <= e.min_weight());
  }

  TEST_CASE("make_spectrum rejects malformed input") {
    CHECK_THROWS_AS(S({0.5, 0.6}), ConfigError);
    CHECK_THROWS_AS(S({1.1, -0.1}), ConfigError);
    CHECK_THROWS_AS(S({std::nan(""), 1.0}), ConfigError);
    CHECK_THROWS_AS(make_spectrum(std::vector<double>{1.0}, -1.0), ConfigError);
  }

  TEST_CASE("exact_spectrum drops zeros and normalizes") {
    const Spectrum s = exact_spectrum(std::vector<double>{0.2, 0.0, 0.8 - 1e-15});
    CHECK(s.exact());
    CHECK(s.atom_count() == 2);
    CHECK(ref::mass(s) == Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(exact_spectrum(std::vector<double>{0.2, 0.2}), ConfigError);
  }

  TEST_CASE("from_levels validates invariants") {
    CHECK_THROWS_AS(Spectrum::from_levels({{0.3, 1}, {0.7, 1}}, 0.0, 0.0), NumericError);
    CHECK_THROWS_AS(Spectrum::from_levels({{0.5, 1}}, 0.0, 0.0), NumericError);
    CHECK_THROWS_AS(Spectrum::from_levels({{0.5, 0}}, 0.5, 0.1), NumericError);
    CHECK_THROWS_AS(Spectrum::from_levels({{0.5, 1}, {0.25, 1}}, 0.25, 0.5), NumericError);
    CHECK_NOTHROW(Spectrum::from_levels({{0.5, 1}, {0.25, 1}}, 0.25, 0.25));
    CHECK(Spectrum::uniform(8).weights() == std::vector<double>(8, 0.125));
  }

  TEST_CASE("tensor: small products") {
    const Spectrum p = S({0.6, 0.4});
    const Spectrum q = S({0.7, 0.3});
    const Spectrum full = tensor(p, q, 4);
    const std::vector<double> want{0.42, 0.28, 0.18, 0.12};
    CHECK(ref::max_abs_diff(full.weights(), want) < 1e-15);
    CHECK(full.tail_mass() == 0.0);

    const Spectrum cut = tensor(p, q, 2);
    CHECK(ref::max_abs_diff(cut.weights(), {0.42, 0.28}) < 1e-15);
    CHECK(cut.tail_mass() == Approx(0.30).epsilon(1e-12));
    CHECK(cut.tail_atom_bound() == Approx(0.18).epsilon(1e-12));

    const Spectrum r = S({0.5, 0.3, 0.2});
    CHECK(tensor(r, Spectrum{}, 3) == r);
    CHECK(tensor(Spectrum{}, r, 10) == r);
  }

  TEST_CASE("tensor matches full enumeration on 50x50 inputs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
      const auto a = ref::random_simplex(50, rng);
      const auto b = ref::random_simplex(50, rng);
      const Spectrum t = tensor(exact_spectrum(a), exact_spectrum(b), 2500);
      CHECK(t.exact());
      CHECK(t.atom_count() == 2500);
      CHECK(ref::max_abs_diff(t.weights(), ref::kron(a, b)) < 1e-15);
      check_invariants(t);
    }
  }

  TEST_CASE("tensor is symmetric, conserves mass and refines monotonically") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const Spectrum p = S(ref::random_simplex(1 + trial % 13, rng));
      const Spectrum q = S(ref::random_simplex(1 + trial % 7, rng));
      for (std::size_t k : {1u, 3u, 10u, 40u}) {
        const Spectrum pq = tensor(p, q, k);
        const Spectrum qp = tensor(q, p, k);
        CHECK(ref::max_abs_diff(pq.weights(), qp.weights()) < 1e-15);
        check_invariants(pq);
        const Spectrum finer = tensor(p, q, 2 * k);
        CHECK(finer.tail_mass() <= pq.tail_mass() + 1e-15);
        const auto coarse = pq.levels();
        const auto fine = finer.levels();
        for (std::size_t i = 0; i < coarse.size(); ++i) {
          CHECK(fine[i].weight == coarse[i].weight);
          CHECK(fine[i].count == coarse[i].count);
        }
      }
    }
  }

  TEST_CASE("tensor of truncated inputs keeps a true prefix") {
    std::mt19937_64 rng(17);
    const auto a = ref::random_simplex(30, rng);
    const auto b = ref::random_simplex(20, rng);
    const Spectrum pa = truncate(S(a), 12);
    const Spectrum pb = truncate(S(b), 9);
    const Spectrum t = tensor(pa, pb, 200);
    check_invariants(t);
    const auto exact = ref::kron(a, b);
    const auto kept = t.weights();
    REQUIRE(kept.size() <= exact.size());
    for (std::size_t i = 0; i < kept.size(); ++i) CHECK(kept[i] == Approx(exact[i]).epsilon(1e-13));
    // Any discarded true atom is bounded by tail_atom_bound.
    CHECK(exact[kept.size()] <= t.tail_atom_bound() * (1 + 1e-12));
  }

  TEST_CASE("tensor_power examples") {
    const Spectrum flat = tensor_power(S({0.5, 0.5}), 3, 8);
    CHECK(flat.weights() == std::vector<double>(8, 0.125));
    CHECK(flat.tail_mass() == 0.0);

    const Spectrum sq = tensor_power(S({0.8, 0.2}), 2, 4);
    CHECK(ref::max_abs_diff(sq.weights(), {0.64, 0.16, 0.16, 0.04}) < 1e-15);

    // λ = 0.25, m = 20, K = 4096: binomial mass of the retained atoms.
    const double lam = 0.25;
    const Spectrum g = tensor_power(S({1 / (1 + lam), lam / (1 + lam)}), 20, 4096);
    CHECK(g.kept_mass() >= 0.999);
    long double binom = 0;
    long double c = 1;
    for (int k = 0; k <= 20; ++k) {
      binom += c * std::pow(static_cast<long double>(lam), k) / std::pow(1.0L + lam, 20);
      c = c * (20 - k) / (k + 1);
    }
    CHECK(static_cast<double>(binom) == Approx(1.0).epsilon(1e-12));
    CHECK(g.kept_mass() == Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("l1_sorted examples") {
    const Spectrum p = S({0.3, 0.2, 0.5});
    const Interval same = l1_sorted(p, p);
    CHECK(same.lo == 0.0);
    CHECK(same.hi == 0.0);
    CHECK(l1_sorted(Spectrum{}, S({0.5, 0.5})).lo == Approx(1.0));
    CHECK(l1_sorted(S({0.7, 0.3}), S({0.6, 0.4})).lo == Approx(0.2).epsilon(1e-14));
  }

  TEST_CASE("fidelity_sorted examples") {
    std::mt19937_64 rng(3);
    const Spectrum p = S(ref::random_simplex(9, rng));
    const Interval f = fidelity_sorted(p, p);
    CHECK(f.lo == Approx(1.0).epsilon(1e-12));
    CHECK(f.hi <= 1.0);
    CHECK(fidelity_sorted(Spectrum{}, S({0.5, 0.5})).lo == Approx(std::sqrt(0.5)).epsilon(1e-14));
  }

  TEST_CASE("truncated intervals enclose the exact values") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
      const auto a = ref::random_simplex(4 + trial % 6, rng);
      const auto b = ref::random_simplex(3 + trial % 5, rng);
      const auto w = ref::random_simplex(12, rng);
      const double exact_l1 = ref::l1(ref::kron(w, a), ref::kron(w, b));
      const double exact_f = ref::fidelity(ref::kron(w, a), ref::kron(w, b));
      for (std::size_t k : {2u, 5u, 11u, 30u, 200u}) {
        const Spectrum ta = tensor(S(w), S(a), k);
        const Spectrum tb = tensor(S(w), S(b), k);
        const Interval l1 = l1_sorted(ta, tb);
        const Interval f = fidelity_sorted(ta, tb);
        CHECK(l1.contains(exact_l1, 1e-12));
        CHECK(f.contains(exact_f, 1e-12));
        CHECK(l1.lo >= 0.0);
        CHECK(l1.hi <= 2.0);
      }
    }
  }

  TEST_CASE("sorted Hellinger distance never exceeds the l1 distance") {
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<int> len(1, 40);
    for (int trial = 0; trial < 10000; ++trial) {
      const Spectrum p = S(ref::random_simplex(static_cast<std::size_t>(len(rng)), rng));
      const Spectrum q = S(ref::random_simplex(static_cast<std::size_t>(len(rng)), rng));
      REQUIRE(hellinger_sq_sorted(p, q) <= l1_kept(p, q));
    }
  }

  TEST_CASE("sorting idempotence and JSON round trip") {
    std::mt19937_64 rng(31);
    auto w = ref::random_simplex(25, rng);
    const Spectrum p = truncate(S(w), 10);
    std::vector<double> raw = p.weights();
    raw.push_back(p.tail_mass());
    std::shuffle(raw.begin(), raw.end(), rng);
    const Spectrum again = make_spectrum(raw, 0.0);
    CHECK(ref::max_abs_diff(again.weights(), [&] {
            auto v = p.weights();
            v.push_back(p.tail_mass());
            return ref::sorted_desc(v);
          }()) < 1e-15);

    const nlohmann::json j = p;
    CHECK(j.contains("weights"));
    CHECK(j.contains("tail_mass"));
    CHECK(j.contains("tail_atom_bound"));
    CHECK(j.at("weights").size() == p.atom_count());
    CHECK(j.get<Spectrum>() == p);

    const nlohmann::json runs = Spectrum::uniform(4);
    CHECK(runs.at("weights").size() == 1);
    CHECK(runs.at("multiplicities") == nlohmann::json::array({4}));
    CHECK(runs.get<Spectrum>() == Spectrum::uniform(4));

    nlohmann::json bad = p;
    bad["extra"] = 1;
    CHECK_THROWS(bad.get<Spectrum>());
  }

  TEST_CASE("Interval construction") {
    CHECK_THROWS_AS(make_interval(1.0, 0.0), NumericError);
    CHECK_THROWS_AS(make_interval(0.0, INFINITY), NumericError);
    const Interval v = make_interval(0.25, 0.75);
    CHECK(v.mid() == 0.5);
    CHECK(v.width() == 0.5);
    CHECK(v.contains(0.8, 0.1));
  }
}
