#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "c2f/fusion.hpp"
#include "c2f/rng.hpp"
#include "support.hpp"

using namespace c2f;

TEST_CASE("unanimous views vote to themselves") {
    rng::Stream s(2);
    Mask3D m = testsupport::random_binary_mask({4, 4, 4}, s);
    Mask3D voted = majority_vote(ViewPredictions{m, m, m});
    for (std::size_t i = 0; i < m.data().size(); ++i) {
        CHECK(voted.data()[i] == m.data()[i]);
    }
}

TEST_CASE("two of three wins, one of three loses") {
    Dims3 dims{1, 1, 2};
    Mask3D a(dims, MaskMode::Binary, {1, 1});
    Mask3D b(dims, MaskMode::Binary, {1, 0});
    Mask3D c(dims, MaskMode::Binary, {0, 0});
    Mask3D voted = majority_vote(ViewPredictions{a, b, c});
    CHECK(voted.data()[0] == 1.0f); // votes (1,1,0)
    CHECK(voted.data()[1] == 0.0f); // votes (1,0,0)
}

TEST_CASE("vote agrees with a per-voxel counting oracle") {
    rng::Stream s(3);
    for (int trial = 0; trial < 100; ++trial) {
        Dims3 dims{6, 6, 6};
        Mask3D a = testsupport::random_binary_mask(dims, s);
        Mask3D b = testsupport::random_binary_mask(dims, s);
        Mask3D c = testsupport::random_binary_mask(dims, s);
        Mask3D voted = majority_vote(ViewPredictions{a, b, c});
        for (std::size_t i = 0; i < voted.data().size(); ++i) {
            int count = (a.data()[i] != 0.0f) + (b.data()[i] != 0.0f) +
                        (c.data()[i] != 0.0f);
            CHECK(voted.data()[i] == (count >= 2 ? 1.0f : 0.0f));
        }
    }
}

TEST_CASE("vote is symmetric under view permutations") {
    rng::Stream s(5);
    Mask3D a = testsupport::random_binary_mask({3, 4, 5}, s);
    Mask3D b = testsupport::random_binary_mask({3, 4, 5}, s);
    Mask3D c = testsupport::random_binary_mask({3, 4, 5}, s);
    Mask3D abc = majority_vote(ViewPredictions{a, b, c});
    Mask3D cab = majority_vote(ViewPredictions{c, a, b});
    Mask3D bca = majority_vote(ViewPredictions{b, c, a});
    for (std::size_t i = 0; i < abc.data().size(); ++i) {
        CHECK(abc.data()[i] == cab.data()[i]);
        CHECK(abc.data()[i] == bca.data()[i]);
    }
}

TEST_CASE("adding foreground to one view never removes output foreground") {
    rng::Stream s(7);
    Dims3 dims{4, 4, 4};
    Mask3D a = testsupport::random_binary_mask(dims, s);
    Mask3D b = testsupport::random_binary_mask(dims, s);
    Mask3D c = testsupport::random_binary_mask(dims, s);
    Mask3D before = majority_vote(ViewPredictions{a, b, c});

    std::vector<float> grown(a.data().begin(), a.data().end());
    for (std::size_t i = 0; i < grown.size(); ++i) {
        if (s.unit() < 0.25) grown[i] = 1.0f;
    }
    Mask3D after = majority_vote(
        ViewPredictions{Mask3D(dims, MaskMode::Binary, grown), b, c});
    for (std::size_t i = 0; i < before.data().size(); ++i) {
        if (before.data()[i] == 1.0f) CHECK(after.data()[i] == 1.0f);
    }
}

TEST_CASE("dim mismatches and non-binary views are rejected") {
    Mask3D a = Mask3D::zeros({2, 2, 2});
    Mask3D small = Mask3D::zeros({2, 2, 1});
    CHECK_THROWS_AS(majority_vote(ViewPredictions{a, a, small}),
                    std::invalid_argument);
    Mask3D prob({2, 2, 2}, MaskMode::Probability,
                std::vector<float>(8, 0.5f));
    CHECK_THROWS_AS(majority_vote(ViewPredictions{a, prob, a}),
                    std::invalid_argument);
}
