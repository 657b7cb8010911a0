#pragma once

#include <cstdint>
#include <vector>

#include "payplace/channel.hpp"
#include "payplace/merkle.hpp"

namespace payplace {

// What the operator broadcasts each period: the full leaf data of the payment
// tree plus the channel table backing it, so every merchant can re-verify and
// re-hash the whole thing, and the timestamp all signatures must cover.
struct OperatorBlock {
    std::uint64_t period_start = 0;
    std::uint64_t tau = 0;
    std::vector<PaymentSet> sets;
    Hash256 root{};
    ChannelTable sources;
};

}  // namespace payplace
