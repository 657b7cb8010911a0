#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "payplace/bls.hpp"

// Wire records of the payment protocol and their canonical byte encodings.
// Every signed message is framed with a one-byte tag so that signatures over
// different record types can never collide.

namespace payplace {

using bls::PublicKey;
using bls::SecretKey;
using bls::Signature;

inline std::optional<std::uint64_t> checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a + b;
    if (s < a) return std::nullopt;
    return s;
}

// Consumer -> operator cumulative channel payment T = (mu, pk_omega, pk_c).
// mu is the total promised so far, not an increment.
struct OffChainPayment {
    std::uint64_t mu = 0;
    PublicKey to_operator;
    PublicKey consumer;
};

inline Bytes payment_message(const OffChainPayment& p) {
    ByteWriter w;
    w.u8(0x01);
    w.u64(p.mu);
    w.raw(p.to_operator.bytes);
    w.raw(p.consumer.bytes);
    return w.take();
}

struct SignedPayment {
    OffChainPayment payment;
    Signature sig;
};

// Operator -> merchant cumulative assignment T' = (mu', pk_p, pk_c): the total
// owed to merchant p out of consumer c's channel.
struct MerchantPayment {
    std::uint64_t mu_prime = 0;
    PublicKey merchant;
    PublicKey consumer;
};

// Registration ticket signed by the operator: (pk_p, tau_r).
inline Bytes ticket_message(const PublicKey& pk_p, std::uint64_t tau_r) {
    ByteWriter w;
    w.u8(0x02);
    w.raw(pk_p.bytes);
    w.u64(tau_r);
    return w.take();
}

// Commitment tuple (R, tau) signed by merchants and verified on-chain.
inline Bytes commitment_message(const Hash256& root, std::uint64_t tau) {
    ByteWriter w;
    w.u8(0x03);
    w.raw(root);
    w.u64(tau);
    return w.take();
}

// Canonical encoding of a merchant's payment set: entries ordered by source
// consumer key. Used for leaf hashing, so the encoding is the identity of the
// set.
inline Bytes encode_payment_set(const PublicKey& owner, std::vector<MerchantPayment> payments) {
    std::sort(payments.begin(), payments.end(), [](const MerchantPayment& a, const MerchantPayment& b) {
        return a.consumer < b.consumer;
    });
    ByteWriter w;
    w.u8(0x04);
    w.raw(owner.bytes);
    w.u64(payments.size());
    for (const auto& t : payments) {
        w.u64(t.mu_prime);
        w.raw(t.merchant.bytes);
        w.raw(t.consumer.bytes);
    }
    return w.take();
}

}  // namespace payplace
