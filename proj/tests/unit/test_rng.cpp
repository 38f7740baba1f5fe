#include <doctest.h>

#include <set>
#include <vector>

#include "pct/rng.hpp"

using namespace pct;

TEST_CASE("same master seed and stream give the same sequence") {
    Rng a(42, Stream::Mobility);
    Rng b(42, Stream::Mobility);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("streams of one master seed are distinct") {
    std::set<std::uint64_t> firsts;
    for (auto s : {Stream::Population, Stream::Seeding, Stream::AppInstall, Stream::Disease, Stream::Mobility,
                   Stream::Transmission, Stream::Testing, Stream::Symptoms, Stream::Behaviour, Stream::Predictor,
                   Stream::Tokens, Stream::DomainRandomization, Stream::Split}) {
        firsts.insert(Rng(7, s).next_u64());
    }
    CHECK(firsts.size() == 13);
    CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}

TEST_CASE("bernoulli edges never draw") {
    Rng rng(3);
    Rng untouched(3);
    for (int i = 0; i < 10; ++i) {
        CHECK_FALSE(rng.bernoulli(0.0));
        CHECK(rng.bernoulli(1.0));
        CHECK_FALSE(rng.bernoulli(-0.5));
    }
    CHECK(rng.next_u64() == untouched.next_u64());
}

TEST_CASE("poisson and normal moments") {
    Rng rng(11);
    const int n = 200000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double k = rng.poisson(2.7);
        sum += k;
        sum_sq += k * k;
    }
    const double mean = sum / n;
    CHECK(mean == doctest::Approx(2.7).epsilon(0.01));
    CHECK(sum_sq / n - mean * mean == doctest::Approx(2.7).epsilon(0.02));
    CHECK(rng.poisson(0.0) == 0U);
    CHECK(rng.normal(3.0, 0.0) == 3.0);
}

TEST_CASE("index stays in range") {
    Rng rng(5);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) ++hits[rng.index(7)];
    for (int h : hits) CHECK(h > 800);
}
