#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "payplace/encoding.hpp"

// Consumer payment channels. A channel is unidirectional and cumulative: the
// consumer signs ever-increasing totals T = (mu, pk_omega, pk_c), and only the
// latest total matters. The operator keeps one entry per consumer.

namespace payplace {

// Consumer's local view of its channel with the operator.
//   deposited : D_c, on-chain collateral backing the channel
//   mu_star   : largest total this consumer has signed so far
//   w_star    : total already paid out on-chain from this channel
struct ConsumerAccount {
    PublicKey pk;
    std::uint64_t deposited = 0;
    std::uint64_t mu_star = 0;
    std::uint64_t w_star = 0;
};

// Signs a new cumulative total raising the channel by `increment`. Fails if
// the channel lacks funds. Callers update mu_star from the returned payment.
inline std::optional<SignedPayment> consumer_pay(const ConsumerAccount& acct, const PublicKey& pk_omega,
                                                 std::uint64_t increment, const SecretKey& sk) {
    auto total = checked_add(acct.mu_star, increment);
    if (!total || *total > acct.deposited) return std::nullopt;
    OffChainPayment p{*total, pk_omega, acct.pk};
    return SignedPayment{p, bls::sign(sk, payment_message(p), bls::HashDomain::standard_msg)};
}

enum class ChannelAccept {
    accepted,
    invalid_signature,
    exceeds_deposit,
    non_monotone,
};

// Operator's table of latest channel totals, keyed by consumer.
class ChannelTable {
  public:
    // Validates and stores a payment. Re-presenting the current total is
    // accepted (idempotent); anything lower is a replay.
    ChannelAccept accept(const SignedPayment& sp, std::uint64_t deposited, bls::OpCounters* ctr = nullptr) {
        if (!bls::verify(sp.payment.consumer, payment_message(sp.payment), sp.sig,
                         bls::HashDomain::standard_msg, ctr))
            return ChannelAccept::invalid_signature;
        if (sp.payment.mu > deposited) return ChannelAccept::exceeds_deposit;
        auto it = entries_.find(sp.payment.consumer.bytes);
        if (it != entries_.end() && sp.payment.mu < it->second.payment.mu) return ChannelAccept::non_monotone;
        if (it == entries_.end())
            entries_.emplace(sp.payment.consumer.bytes, sp);
        else
            it->second = sp;
        return ChannelAccept::accepted;
    }

    const SignedPayment* latest(const PublicKey& consumer) const {
        auto it = entries_.find(consumer.bytes);
        return it == entries_.end() ? nullptr : &it->second;
    }

    std::size_t size() const { return entries_.size(); }

    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

  private:
    std::map<Bytes, SignedPayment> entries_;
};

// Resolves consumer c's funding transaction out of a revealed channel table:
// present, correctly signed, and covered by the consumer's deposit. This is
// what merchants and the contract run before crediting anything sourced from
// c. `cache` may memoize signature checks across repeated lookups.
inline std::optional<SignedPayment> get_source_transaction(const ChannelTable& table, const PublicKey& consumer,
                                                           std::uint64_t deposited,
                                                           bls::VerifyCache* cache = nullptr,
                                                           bls::OpCounters* ctr = nullptr) {
    const SignedPayment* sp = table.latest(consumer);
    if (!sp) return std::nullopt;
    Bytes msg = payment_message(sp->payment);
    bool ok = cache ? cache->verify(sp->payment.consumer, msg, sp->sig, bls::HashDomain::standard_msg, ctr)
                    : bls::verify(sp->payment.consumer, msg, sp->sig, bls::HashDomain::standard_msg, ctr);
    if (!ok || sp->payment.mu > deposited) return std::nullopt;
    return *sp;
}

}  // namespace payplace
