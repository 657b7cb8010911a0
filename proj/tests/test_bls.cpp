#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "payplace/bls.hpp"

using namespace payplace::bls;

namespace {

payplace::Bytes msg_bytes(std::string_view s) {
    return payplace::Bytes(s.begin(), s.end());
}

}  // namespace

TEST_CASE("keygen is deterministic in the seed") {
    KeyPair a = keygen(std::uint64_t{42});
    KeyPair b = keygen(std::uint64_t{42});
    KeyPair c = keygen(std::uint64_t{43});
    REQUIRE(a.sk.v == b.sk.v);
    REQUIRE(a.pk == b.pk);
    REQUIRE(a.sk.v != c.sk.v);
    REQUIRE(a.pk != c.pk);
    REQUIRE(a.sk.v >= 1);
    REQUIRE(a.sk.v < params::ORDER_R);
    REQUIRE(a.pk.point == g1_generator().mul(a.sk.v));
}

TEST_CASE("sign and verify") {
    KeyPair kp = keygen(std::uint64_t{1});
    KeyPair other = keygen(std::uint64_t{2});
    auto msg = msg_bytes("pay 10 to the corner bakery");
    Signature sig = sign(kp.sk, msg);

    OpCounters ctr;
    REQUIRE(verify(kp.pk, msg, sig, HashDomain::standard_msg, &ctr));
    REQUIRE(ctr.pairings == 2);
    REQUIRE(ctr.hash_to_g0 == 1);

    REQUIRE(!verify(other.pk, msg, sig));
    REQUIRE(!verify(kp.pk, msg_bytes("pay 11 to the corner bakery"), sig));
    REQUIRE(!verify(kp.pk, msg, sig, HashDomain::proof_of_possession));
    REQUIRE(!verify_point(G1::identity(), msg, sig.point, HashDomain::standard_msg));
}

TEST_CASE("key and signature serialization") {
    KeyPair kp = keygen(std::uint64_t{7});
    auto pk2 = PublicKey::from_bytes(kp.pk.bytes);
    REQUIRE(pk2.has_value());
    REQUIRE(*pk2 == kp.pk);

    Signature sig = sign(kp.sk, msg_bytes("x"));
    auto sig2 = Signature::from_bytes(sig.serialize());
    REQUIRE(sig2.has_value());
    REQUIRE(*sig2 == sig);

    // identity public key is rejected at parse time
    REQUIRE(!PublicKey::from_bytes(G1::identity().serialize()).has_value());
}

TEST_CASE("hash domains are separated") {
    auto msg = msg_bytes("same bytes");
    G0 std_pt = hash_to_g0(msg, HashDomain::standard_msg);
    G0 pop_pt = hash_to_g0(msg, HashDomain::proof_of_possession);
    REQUIRE(!(std_pt == pop_pt));
}

TEST_CASE("aggregate signature over a common message") {
    auto msg = msg_bytes("block root|17");
    std::vector<KeyPair> kps;
    std::vector<Signature> sigs;
    std::vector<PublicKey> pks;
    for (std::uint64_t i = 0; i < 5; ++i) {
        kps.push_back(keygen(100 + i));
        pks.push_back(kps.back().pk);
        sigs.push_back(sign(kps.back().sk, msg));
    }
    auto agg = aggregate_signatures(sigs);
    REQUIRE(agg.has_value());
    G1 apk = aggregate_keys(pks);
    REQUIRE(verify_point(apk, msg, agg->point, HashDomain::standard_msg));

    // dropping one signer's signature must break the check
    std::vector<Signature> partial(sigs.begin(), sigs.end() - 1);
    auto agg_partial = aggregate_signatures(partial);
    REQUIRE(!verify_point(apk, msg, agg_partial->point, HashDomain::standard_msg));

    // removing that signer's key from the aggregate restores it
    G1 apk_less = remove_key(apk, pks.back());
    REQUIRE(verify_point(apk_less, msg, agg_partial->point, HashDomain::standard_msg));

    REQUIRE(!aggregate_signatures({}).has_value());
}

TEST_CASE("proof of possession") {
    KeyPair kp = keygen(std::uint64_t{11});
    Signature pop = pop_create(kp.sk, kp.pk);
    REQUIRE(pop_verify(kp.pk, pop));

    // a standard-domain signature over the same bytes is not a valid pop
    Signature wrong_domain = sign(kp.sk, kp.pk.bytes, HashDomain::standard_msg);
    REQUIRE(!pop_verify(kp.pk, wrong_domain));

    // someone else's pop does not transfer
    KeyPair other = keygen(std::uint64_t{12});
    REQUIRE(!pop_verify(other.pk, pop));
}

TEST_CASE("batched proof of possession uses x+1 pairings") {
    std::vector<std::pair<PublicKey, Signature>> pairs;
    for (std::uint64_t i = 0; i < 4; ++i) {
        KeyPair kp = keygen(200 + i);
        pairs.push_back({kp.pk, pop_create(kp.sk, kp.pk)});
    }
    OpCounters ctr;
    REQUIRE(pop_verify_batch(pairs, &ctr));
    REQUIRE(ctr.pairings == 5);
    REQUIRE(ctr.hash_to_g0 == 4);

    auto bad = pairs;
    bad[2].second = bad[1].second;
    REQUIRE(!pop_verify_batch(bad));

    OpCounters empty_ctr;
    REQUIRE(pop_verify_batch({}, &empty_ctr));
    REQUIRE(empty_ctr.pairings == 0);
}

TEST_CASE("rogue public key forges the aggregate but cannot prove possession") {
    auto msg = msg_bytes("root|42");
    std::vector<PublicKey> honest;
    for (std::uint64_t i = 0; i < 3; ++i) honest.push_back(keygen(300 + i).pk);

    // attacker publishes g1^beta divided by the honest keys, so the aggregate
    // collapses to g1^beta and one known exponent signs for the whole group
    u128 beta = 0x1234567890abcdefull;
    G1 pk_att_point = g1_generator().mul(beta) - aggregate_keys(honest);
    PublicKey pk_att = PublicKey::from_point(pk_att_point);

    std::vector<PublicKey> all = honest;
    all.push_back(pk_att);
    G1 apk = aggregate_keys(all);
    Signature forged{hash_to_g0(msg, HashDomain::standard_msg).mul(beta)};
    REQUIRE(verify_point(apk, msg, forged.point, HashDomain::standard_msg));

    // but beta is not the discrete log of pk_att, so the attacker cannot
    // produce its proof of possession
    Signature fake_pop = sign(SecretKey{beta}, pk_att.bytes, HashDomain::proof_of_possession);
    REQUIRE(!pop_verify(pk_att, fake_pop));
}

TEST_CASE("verify cache agrees with direct verification") {
    KeyPair kp = keygen(std::uint64_t{21});
    auto msg = msg_bytes("cached");
    Signature sig = sign(kp.sk, msg);
    Signature bad = sign(kp.sk, msg_bytes("other"));

    VerifyCache cache;
    for (int i = 0; i < 3; ++i) {
        REQUIRE(cache.verify(kp.pk, msg, sig) == verify(kp.pk, msg, sig));
        REQUIRE(cache.verify(kp.pk, msg, bad) == verify(kp.pk, msg, bad));
    }
}
