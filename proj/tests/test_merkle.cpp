#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "payplace/merkle.hpp"

using namespace payplace;

namespace {

std::vector<bls::KeyPair> keys(std::size_t n, std::uint64_t seed0 = 100) {
    std::vector<bls::KeyPair> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(bls::keygen(seed0 + i));
    return out;
}

PaymentSet set_of(const bls::KeyPair& owner, const bls::KeyPair& consumer, std::uint64_t mu) {
    return PaymentSet{owner.pk, {{mu, owner.pk, consumer.pk}}};
}

// Independent re-derivation of the tree from first principles: concatenate
// bytes by hand and fold with plain sha256, no library helpers.
Hash256 hand_hash(Byte tag, const Bytes& a, const Bytes& b = {}) {
    Bytes buf;
    buf.push_back(tag);
    buf.insert(buf.end(), a.begin(), a.end());
    buf.insert(buf.end(), b.begin(), b.end());
    return sha256(buf);
}

Bytes as_bytes(const Hash256& h) { return Bytes(h.begin(), h.end()); }

}  // namespace

TEST_CASE("three leaf root matches a hand computed fold") {
    auto ks = keys(5);
    std::vector<PaymentSet> sets{set_of(ks[0], ks[3], 10), set_of(ks[1], ks[3], 20), set_of(ks[2], ks[4], 30)};
    MerkleTree tree(sets);

    // replicate: sort by owner key bytes, leaf = H(0x00|enc), pad odd level
    std::sort(sets.begin(), sets.end(),
              [](const PaymentSet& a, const PaymentSet& b) { return a.owner < b.owner; });
    Hash256 l0 = hand_hash(0x00, sets[0].encode());
    Hash256 l1 = hand_hash(0x00, sets[1].encode());
    Hash256 l2 = hand_hash(0x00, sets[2].encode());
    Hash256 n0 = hand_hash(0x01, as_bytes(l0), as_bytes(l1));
    Hash256 n1 = hand_hash(0x01, as_bytes(l2), as_bytes(l2));
    Hash256 root = hand_hash(0x01, as_bytes(n0), as_bytes(n1));
    REQUIRE(tree.root() == root);
    REQUIRE(tree.height() == 2);
}

TEST_CASE("input order does not change the tree") {
    auto ks = keys(6);
    std::vector<PaymentSet> sets;
    for (std::size_t i = 0; i < 4; ++i) sets.push_back(set_of(ks[i], ks[4], 10 * (i + 1)));
    MerkleTree a(sets);
    std::reverse(sets.begin(), sets.end());
    MerkleTree b(sets);
    std::swap(sets[0], sets[2]);
    MerkleTree c(sets);
    REQUIRE(a.root() == b.root());
    REQUIRE(a.root() == c.root());
}

TEST_CASE("duplicate owner is rejected at construction") {
    auto ks = keys(3);
    std::vector<PaymentSet> sets{set_of(ks[0], ks[2], 1), set_of(ks[0], ks[2], 2)};
    REQUIRE_THROWS_AS(MerkleTree(sets), std::invalid_argument);
    REQUIRE_THROWS_AS(MerkleTree(std::vector<PaymentSet>{}), std::invalid_argument);
}

TEST_CASE("single leaf tree has the leaf as root and an empty proof") {
    auto ks = keys(2);
    MerkleTree tree({set_of(ks[0], ks[1], 5)});
    REQUIRE(tree.height() == 0);
    REQUIRE(tree.root() == leaf_hash(tree.sets()[0].encode()));
    auto proof = tree.prove(0);
    REQUIRE(proof.siblings.empty());
    REQUIRE(check_mp(proof, tree.root()));
}

TEST_CASE("every leaf proves against the root for all small sizes") {
    auto ks = keys(20);
    for (std::size_t n = 1; n <= 17; ++n) {
        std::vector<PaymentSet> sets;
        for (std::size_t i = 0; i < n; ++i) sets.push_back(set_of(ks[i], ks[18], i + 1));
        MerkleTree tree(sets);
        std::size_t expect_height = 0;
        while ((std::size_t{1} << expect_height) < n) ++expect_height;
        REQUIRE(tree.height() == expect_height);
        for (std::size_t i = 0; i < n; ++i) {
            auto proof = tree.prove(i);
            REQUIRE(proof.siblings.size() == expect_height);
            REQUIRE(check_mp(proof, tree.root()));
        }
    }
}

TEST_CASE("proof verification costs exactly the tree height in hashes") {
    auto owner_keys = keys(1 << 6, 500);
    auto consumer = bls::keygen(999);
    std::vector<PaymentSet> sets;
    for (std::size_t i = 0; i < owner_keys.size(); ++i) sets.push_back(set_of(owner_keys[i], consumer, i + 1));
    MerkleTree tree(sets);
    REQUIRE(tree.height() == 6);
    bls::OpCounters ctr;
    REQUIRE(check_mp(tree.prove(17), tree.root(), &ctr));
    REQUIRE(ctr.hash_evals == 6);
    REQUIRE(ctr.pairings == 0);
}

TEST_CASE("proofs are position and content binding") {
    auto ks = keys(9);
    std::vector<PaymentSet> sets;
    for (std::size_t i = 0; i < 8; ++i) sets.push_back(set_of(ks[i], ks[8], i + 1));
    MerkleTree tree(sets);

    auto proof = tree.prove(3);
    REQUIRE(check_mp(proof, tree.root()));

    auto wrong_index = proof;
    wrong_index.index ^= 1;
    REQUIRE_FALSE(check_mp(wrong_index, tree.root()));

    auto wrong_leaf = proof;
    wrong_leaf.leaf[0] ^= 0x80;
    REQUIRE_FALSE(check_mp(wrong_leaf, tree.root()));

    auto wrong_sibling = proof;
    wrong_sibling.siblings[1][4] ^= 1;
    REQUIRE_FALSE(check_mp(wrong_sibling, tree.root()));

    // an over-long path must not be accepted just because the fold collides
    auto padded = proof;
    padded.siblings.push_back(proof.siblings[0]);
    REQUIRE_FALSE(check_mp(padded, tree.root()));

    // an inner node cannot be opened as a leaf: leaf and node domains differ
    MerkleProof node_as_leaf;
    node_as_leaf.leaf = node_hash(tree.prove(0).leaf, tree.prove(1).leaf);
    node_as_leaf.index = 0;
    node_as_leaf.siblings = {proof.siblings[1], proof.siblings[2]};
    REQUIRE_FALSE(check_mp(node_as_leaf, tree.root()));
}

TEST_CASE("any mutation of any payment moves the root") {
    std::mt19937_64 rng(0xc0ffee);
    auto owners = keys(12, 700);
    auto consumers = keys(6, 900);
    for (int iter = 0; iter < 400; ++iter) {
        std::size_t n = 2 + rng() % 10;
        std::vector<PaymentSet> sets;
        for (std::size_t i = 0; i < n; ++i) {
            PaymentSet s{owners[i].pk, {}};
            std::size_t m = 1 + rng() % 3;
            for (std::size_t j = 0; j < m; ++j)
                s.payments.push_back({rng() % 100000 + 1, owners[i].pk, consumers[j].pk});
            sets.push_back(std::move(s));
        }
        MerkleTree tree(sets);
        auto mutated = sets;
        std::size_t si = rng() % n;
        std::size_t pi = rng() % mutated[si].payments.size();
        mutated[si].payments[pi].mu_prime += 1 + rng() % 7;
        MerkleTree other(mutated);
        REQUIRE(tree.root() != other.root());
    }
}
