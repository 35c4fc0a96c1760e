#include <algorithm>
#include <cmath>
#include <set>

#include "depthforge/parallel.hpp"
#include "depthforge/rng.hpp"
#include "doctest.h"

using namespace depthforge;

TEST_CASE("rng: same seed, same stream") {
    CounterRng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: different seeds diverge") {
    CounterRng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += a.next_u64() == b.next_u64();
    CHECK(same == 0);
}

TEST_CASE("rng: derived stream draws do not depend on parent consumption") {
    CounterRng a(7);
    CounterRng d1 = a.derive("aug");
    for (int i = 0; i < 10; ++i) a.next_u64();
    CounterRng d2 = a.derive("aug");
    for (int i = 0; i < 16; ++i) CHECK(d1.next_u64() == d2.next_u64());
}

TEST_CASE("rng: named and numbered derivations are distinct streams") {
    CounterRng root(3);
    CounterRng a = root.derive("crop");
    CounterRng b = root.derive("grain");
    CounterRng c = root.derive(0);
    CounterRng d = root.derive(1);
    std::set<uint64_t> firsts = {a.next_u64(), b.next_u64(), c.next_u64(), d.next_u64()};
    CHECK(firsts.size() == 4);
}

TEST_CASE("rng: next_double in [0,1)") {
    CounterRng r(11);
    for (int i = 0; i < 10000; ++i) {
        const double v = r.next_double();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("rng: next_below stays below and covers small ranges") {
    CounterRng r(5);
    std::set<uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const uint64_t v = r.next_below(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
    CHECK(r.next_below(1) == 0);
    CHECK(r.next_below(0) == 0);
}

TEST_CASE("rng: uniform_int inclusive bounds") {
    CounterRng r(9);
    bool saw_lo = false, saw_hi = false;
    for (int i = 0; i < 2000; ++i) {
        const int64_t v = r.uniform_int(-3, 3);
        CHECK(v >= -3);
        CHECK(v <= 3);
        saw_lo = saw_lo || v == -3;
        saw_hi = saw_hi || v == 3;
    }
    CHECK(saw_lo);
    CHECK(saw_hi);
}

TEST_CASE("rng: normal moments") {
    CounterRng r(13);
    const int n = 100000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double v = r.normal();
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("rng: shuffle is a permutation and is seed-stable") {
    std::vector<int> v(50), w(50);
    for (int i = 0; i < 50; ++i) v[i] = w[i] = i;
    CounterRng a(21), b(21);
    a.shuffle(v);
    b.shuffle(w);
    CHECK(v == w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
    CHECK(v != sorted);  // 50 elements: the identity draw is astronomically unlikely
}

TEST_CASE("parallel: chunked loop covers every index once for any job count") {
    for (int jobs : {1, 3, 8}) {
        set_jobs(jobs);
        std::vector<int> hits(1000, 0);
        parallel_for_each(hits.size(), [&](size_t i) { hits[i] += 1; });
        for (int h : hits) CHECK(h == 1);
    }
    set_jobs(1);
}

TEST_CASE("parallel: exceptions from workers surface on the caller") {
    set_jobs(4);
    CHECK_THROWS_AS(parallel_for_each(100,
                                      [&](size_t i) {
                                          if (i == 57) throw std::runtime_error("boom");
                                      }),
                    std::runtime_error);
    set_jobs(1);
}
