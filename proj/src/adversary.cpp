#include "fedflip/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fedflip/errors.hpp"
#include "fedflip/rng.hpp"

namespace fedflip {

void AttackSpec::validate() const {
    if (malicious_client < 0) throw ConfigError("AttackSpec: malicious_client must be >= 0");
    if (!(flip_percent >= 0.0 && flip_percent <= 100.0)) {
        std::ostringstream msg;
        msg << "AttackSpec: flip_percent " << flip_percent << " outside [0, 100]";
        throw ConfigError(msg.str());
    }
}

FlipResult flip_labels(const ClientShard& shard, const AttackSpec& spec, int num_classes) {
    spec.validate();
    if (num_classes < 2) throw ShapeError("flip_labels: need at least 2 classes");
    const std::size_t n = shard.data.size();
    if (n == 0) throw DataError("flip_labels: shard is empty");

    const auto k = static_cast<std::size_t>(
        std::floor(spec.flip_percent * static_cast<double>(n) / 100.0));

    FlipResult result;
    result.poisoned = shard;
    if (k == 0) return result;

    auto idx = shuffled_indices(n, spec.seed);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());

    // Row selection takes the first k of one seeded permutation and each
    // replacement depends only on (seed, row), so the corruption at a lower
    // flip percentage is a subset of the corruption at a higher one.
    for (std::size_t i : idx) {
        const int old_label = shard.data.labels[i];
        const std::uint64_t draw = derive_seed(spec.seed, kAttackStream, i);
        auto alt = static_cast<int>(draw % static_cast<std::uint64_t>(num_classes - 1));
        if (alt >= old_label) ++alt;  // uniform over the other num_classes-1 labels
        result.poisoned.data.labels[i] = alt;
    }
    result.flipped_indices = std::move(idx);
    return result;
}

}  // namespace fedflip
