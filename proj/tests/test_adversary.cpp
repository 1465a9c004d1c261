#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "fedflip/adversary.hpp"
#include "fedflip/dataset.hpp"
#include "fedflip/errors.hpp"
#include "fedflip/rng.hpp"

using namespace fedflip;

namespace {

// Small shards are enough; flip_labels is width-agnostic.
ClientShard make_shard(std::size_t n, std::uint64_t seed, int width = 4) {
    Rng rng(seed);
    ClientShard shard;
    shard.client_id = 0;
    shard.data.features = Matrix(n, width);
    for (double& v : shard.data.features.data()) v = rng.uniform();
    shard.data.labels.resize(n);
    for (int& l : shard.data.labels) l = static_cast<int>(rng.bounded(kNumClasses));
    return shard;
}

}  // namespace

TEST_CASE("flip_labels with p=0 is the identity") {
    const ClientShard shard = make_shard(40, 1);
    const FlipResult result = flip_labels(shard, {0, 0.0, 99}, kNumClasses);
    CHECK(result.flipped_indices.empty());
    CHECK(result.poisoned.data.labels == shard.data.labels);
    CHECK(result.poisoned.data.features == shard.data.features);
}

TEST_CASE("flip_labels changes exactly 14 labels for p=14 on 100 rows") {
    const ClientShard shard = make_shard(100, 2);
    const FlipResult result = flip_labels(shard, {0, 14.0, 5}, kNumClasses);
    CHECK(result.flipped_indices.size() == 14);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < 100; ++i) {
        if (result.poisoned.data.labels[i] != shard.data.labels[i]) ++changed;
    }
    CHECK(changed == 14);
}

TEST_CASE("flip_labels diff oracle on 50 rows at p=10") {
    const ClientShard shard = make_shard(50, 3);
    const FlipResult result = flip_labels(shard, {0, 10.0, 6}, kNumClasses);
    REQUIRE(result.flipped_indices.size() == 5);

    // flipped rows differ in label only; unflipped rows are identical
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < 50; ++i) {
        const bool flipped =
            cursor < result.flipped_indices.size() && result.flipped_indices[cursor] == i;
        if (flipped) ++cursor;
        if (flipped) {
            CHECK(result.poisoned.data.labels[i] != shard.data.labels[i]);
            CHECK(result.poisoned.data.labels[i] >= 0);
            CHECK(result.poisoned.data.labels[i] < kNumClasses);
        } else {
            CHECK(result.poisoned.data.labels[i] == shard.data.labels[i]);
        }
    }
    CHECK(result.poisoned.data.features == shard.data.features);
}

TEST_CASE("flipped_indices are sorted and unique") {
    const ClientShard shard = make_shard(200, 4);
    const FlipResult result = flip_labels(shard, {0, 37.0, 7}, kNumClasses);
    REQUIRE(result.flipped_indices.size() == 74);
    for (std::size_t i = 1; i < result.flipped_indices.size(); ++i) {
        CHECK(result.flipped_indices[i - 1] < result.flipped_indices[i]);
    }
}

TEST_CASE("flip count is floor(p*n/100) across sampled sizes") {
    Rng rng(505);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + rng.bounded(500);
        const double p = static_cast<double>(rng.bounded(51) * 2);  // 0, 2, ..., 100
        const ClientShard shard = make_shard(n, derive_seed(60, trial), 2);
        const FlipResult result = flip_labels(shard, {0, p, derive_seed(61, trial)}, kNumClasses);
        const auto expected = static_cast<std::size_t>(p * static_cast<double>(n)) / 100;
        CHECK(result.flipped_indices.size() == expected);
    }
}

TEST_CASE("p=100 flips every label to a different class") {
    const ClientShard shard = make_shard(120, 8);
    const FlipResult result = flip_labels(shard, {0, 100.0, 9}, kNumClasses);
    CHECK(result.flipped_indices.size() == 120);
    for (std::size_t i = 0; i < 120; ++i) {
        CHECK(result.poisoned.data.labels[i] != shard.data.labels[i]);
    }
}

TEST_CASE("alternate classes are drawn near-uniformly") {
    // All originals are class 3; each of the 6 alternates should appear
    // n/6 +- 4 sigma times.
    const std::size_t n = 3000;
    ClientShard shard = make_shard(n, 10, 2);
    for (int& l : shard.data.labels) l = 3;
    const FlipResult result = flip_labels(shard, {0, 100.0, 11}, kNumClasses);

    std::array<int, kNumClasses> hist{};
    for (int label : result.poisoned.data.labels) ++hist[label];
    CHECK(hist[3] == 0);
    const double expected = n / 6.0;
    const double sigma = std::sqrt(n * (1.0 / 6) * (5.0 / 6));
    for (int c = 0; c < kNumClasses; ++c) {
        if (c == 3) continue;
        CHECK(std::abs(hist[c] - expected) <= 4.0 * sigma);
    }
}

TEST_CASE("flip_labels validates its inputs") {
    const ClientShard shard = make_shard(10, 12);
    CHECK_THROWS_AS(flip_labels(shard, {0, -1.0, 1}, kNumClasses), ConfigError);
    CHECK_THROWS_AS(flip_labels(shard, {0, 101.0, 1}, kNumClasses), ConfigError);
    ClientShard empty;
    empty.data.features = Matrix(0, 4);
    CHECK_THROWS_AS(flip_labels(empty, {0, 10.0, 1}, kNumClasses), DataError);
}
