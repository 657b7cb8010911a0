#pragma once

#include <optional>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <string>

#include "payplace/pairing.hpp"

// BLS signatures in the arrangement used by the payment protocol: signatures
// and hashed messages live in G0 (base field), public keys in G1 (twist).
//   sign:   sigma = H0(m)^sk
//   verify: e(sigma, g1) == e(H0(m), pk)
// Aggregation is the group product on either side. Proofs of possession are
// signatures over the signer's own serialized public key under a separate
// hash domain, and a batch of x of them verifies with one (x+1)-pairing
// product equation.

namespace payplace::bls {

// Operation counters threaded explicitly through every verifying call so
// callers (the contract in particular) can expose exact on-chain-relevant
// work: pairing evaluations, key-group multiplications, hashes into G0 and
// plain hash evaluations.
struct OpCounters {
    std::uint64_t pairings = 0;
    std::uint64_t g1_mults = 0;
    std::uint64_t hash_to_g0 = 0;
    std::uint64_t hash_evals = 0;

    void reset() { *this = OpCounters{}; }
};

enum class HashDomain { standard_msg, proof_of_possession };

inline G0 hash_to_g0(std::span<const Byte> msg, HashDomain domain, OpCounters* ctr = nullptr) {
    if (ctr) ctr->hash_to_g0 += 1;
    const std::string_view dst =
        domain == HashDomain::standard_msg ? "payplace-g0-std-v1" : "payplace-g0-pop-v1";
    for (unsigned attempt = 0; attempt < 256; ++attempt) {
        ByteWriter w;
        w.str(dst);
        w.u8(static_cast<Byte>(attempt));
        w.u64(msg.size());
        w.raw(msg);
        Hash256 h = sha256(std::span<const Byte>(w.bytes().data(), w.bytes().size()));
        Fp x = Fp::from_bytes_mod(h);
        Fp rhs = x.sqr() * x + CurveTraits<Fp>::b();
        if (!rhs.legendre_is_square()) continue;
        Fp y = rhs.sqrt();
        if (y.sqr() != rhs) continue;  // rhs == 0 edge handled: 0 sqrt ok
        if ((static_cast<std::uint64_t>(y.value()) & 1) != (h[31] & 1)) y = -y;
        G0 p = G0::from_affine(x, y).mul(params::COFACTOR_G0);
        if (!p.is_identity()) return p;
    }
    // unreachable for any realistic input; fail loudly rather than loop
    assert(false && "hash_to_g0 exhausted retry budget");
    return G0::identity();
}

struct SecretKey {
    u128 v = 0;
};

struct PublicKey {
    G1 point;
    Bytes bytes;  // canonical serialization, used for ordering and hashing

    static PublicKey from_point(const G1& p) {
        PublicKey out;
        out.point = p;
        out.bytes = p.serialize();
        return out;
    }

    static std::optional<PublicKey> from_bytes(std::span<const Byte> in) {
        auto p = G1::deserialize(in);
        if (!p || p->is_identity()) return std::nullopt;
        return from_point(*p);
    }

    bool operator==(const PublicKey& o) const { return bytes == o.bytes; }
    bool operator!=(const PublicKey& o) const { return bytes != o.bytes; }
    bool operator<(const PublicKey& o) const { return bytes_less(bytes, o.bytes); }
};

struct Signature {
    G0 point;

    Bytes serialize() const { return point.serialize(); }

    static std::optional<Signature> from_bytes(std::span<const Byte> in) {
        auto p = G0::deserialize(in);
        if (!p) return std::nullopt;
        return Signature{*p};
    }

    bool operator==(const Signature& o) const { return point == o.point; }
};

struct KeyPair {
    SecretKey sk;
    PublicKey pk;
};

inline KeyPair keygen(std::span<const Byte> seed) {
    Hash256 h = sha256([&] {
        ByteWriter w;
        w.str("payplace-keygen-v1");
        w.u64(seed.size());
        w.raw(seed);
        return w.take();
    }());
    u128 acc = 0;
    for (Byte b : h) acc = ((acc << 8) | b) % (params::ORDER_R - 1);
    KeyPair kp;
    kp.sk.v = acc + 1;
    kp.pk = PublicKey::from_point(g1_generator().mul(kp.sk.v));
    return kp;
}

inline KeyPair keygen(std::uint64_t seed) {
    ByteWriter w;
    w.u64(seed);
    return keygen(std::span<const Byte>(w.bytes().data(), w.bytes().size()));
}

inline Signature sign(const SecretKey& sk, std::span<const Byte> msg,
                      HashDomain domain = HashDomain::standard_msg) {
    return Signature{hash_to_g0(msg, domain).mul(sk.v)};
}

inline const G1Prepared& prepared_g1_generator() {
    static const G1Prepared prep = prepare_g1(g1_generator());
    return prep;
}

// Core check e(sigma, g1) == e(H0(m), pk), evaluated as a two-pairing product
// with one shared final exponentiation. Counts 2 pairings, 1 hash into G0.
inline bool verify_point(const G1& pk, std::span<const Byte> msg, const G0& sig, HashDomain domain,
                         OpCounters* ctr = nullptr) {
    if (pk.is_identity()) return false;
    if (ctr) ctr->pairings += 2;
    G0 h = hash_to_g0(msg, domain, ctr);
    return pairing_product_is_one({{-sig, prepared_g1_generator()}, {h, prepare_g1(pk)}});
}

inline bool verify(const PublicKey& pk, std::span<const Byte> msg, const Signature& sig,
                   HashDomain domain = HashDomain::standard_msg, OpCounters* ctr = nullptr) {
    return verify_point(pk.point, msg, sig.point, domain, ctr);
}

enum class AggregateError { empty_input };

inline std::optional<Signature> aggregate_signatures(std::span<const Signature> sigs) {
    if (sigs.empty()) return std::nullopt;
    G0 acc = G0::identity();
    for (const auto& s : sigs) acc = acc + s.point;
    return Signature{acc};
}

// Key-group accumulation helpers. The contract counts each fold as one
// key-group multiplication; agent-side bookkeeping passes no counter.
inline void fold_key(G1& acc, const G1& pk, OpCounters* ctr = nullptr) {
    if (ctr) ctr->g1_mults += 1;
    acc = acc + pk;
}

inline G1 aggregate_keys(std::span<const PublicKey> pks) {
    G1 acc = G1::identity();
    for (const auto& pk : pks) fold_key(acc, pk.point);
    return acc;
}

inline G1 remove_key(const G1& apk, const PublicKey& pk, OpCounters* ctr = nullptr) {
    if (ctr) ctr->g1_mults += 1;
    return apk - pk.point;
}

inline Signature pop_create(const SecretKey& sk, const PublicKey& pk) {
    return sign(sk, pk.bytes, HashDomain::proof_of_possession);
}

inline bool pop_verify(const PublicKey& pk, const Signature& pop, OpCounters* ctr = nullptr) {
    return verify(pk, pk.bytes, pop, HashDomain::proof_of_possession, ctr);
}

// Batch proof-of-possession check: for x pairs, one (x+1)-pairing equation
//   e(-(sum pops), g1) * prod e(H0_pop(pk_i), pk_i) == 1
inline bool pop_verify_batch(std::span<const std::pair<PublicKey, Signature>> pairs,
                             OpCounters* ctr = nullptr) {
    if (pairs.empty()) return true;
    if (ctr) ctr->pairings += pairs.size() + 1;
    G0 agg = G0::identity();
    std::vector<std::pair<G0, G1Prepared>> eq;
    eq.reserve(pairs.size() + 1);
    eq.push_back({G0::identity(), prepared_g1_generator()});  // patched below
    for (const auto& [pk, pop] : pairs) {
        if (pk.point.is_identity()) return false;
        agg = agg + pop.point;
        eq.push_back({hash_to_g0(pk.bytes, HashDomain::proof_of_possession, ctr), prepare_g1(pk.point)});
    }
    eq[0].first = -agg;
    return pairing_product_is_one(eq);
}

// Memoized verification for simulation agents. The contract never uses this:
// its pairing counts must reflect every on-chain check.
class VerifyCache {
  public:
    bool verify(const PublicKey& pk, std::span<const Byte> msg, const Signature& sig,
                HashDomain domain = HashDomain::standard_msg, OpCounters* ctr = nullptr) {
        ByteWriter w;
        w.u8(domain == HashDomain::standard_msg ? 0 : 1);
        w.raw(pk.bytes);
        w.raw(sig.point.serialize());
        w.raw(sha256(msg));
        std::string key(reinterpret_cast<const char*>(w.bytes().data()), w.bytes().size());
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        bool ok = bls::verify(pk, msg, sig, domain, ctr);
        memo_.emplace(std::move(key), ok);
        return ok;
    }

  private:
    std::unordered_map<std::string, bool> memo_;
};

}  // namespace payplace::bls
