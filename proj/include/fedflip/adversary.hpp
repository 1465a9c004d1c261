#pragma once

#include <cstdint>
#include <vector>

#include "fedflip/dataset.hpp"

namespace fedflip {

// A malicious client flips flip_percent of its shard's labels before local
// training starts; the poisoned shard then persists for every round.
struct AttackSpec {
    int malicious_client = 0;
    double flip_percent = 0.0;  // p in [0, 100]
    std::uint64_t seed = 0;

    void validate() const;
};

struct FlipResult {
    ClientShard poisoned;
    std::vector<std::size_t> flipped_indices;  // sorted
};

// Picks k = floor(p/100 * n) rows uniformly without replacement and replaces
// each chosen label with a uniform draw from the other num_classes - 1
// classes. Features and unchosen rows are untouched.
FlipResult flip_labels(const ClientShard& shard, const AttackSpec& spec, int num_classes);

}  // namespace fedflip
