#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "payplace/encoding.hpp"

// Merkle tree over merchant payment sets. Leaves are hashes of canonically
// encoded sets, ordered by the owning merchant key; inner levels pair
// left/right and duplicate the last node of an odd level. Leaf and node
// hashes live in distinct domains (0x00 / 0x01 prefix) so an inner node can
// never be opened as a leaf.

namespace payplace {

// A merchant's slice of a block: every payment names `owner` as recipient and
// the source consumers are pairwise distinct.
struct PaymentSet {
    PublicKey owner;
    std::vector<MerchantPayment> payments;

    Bytes encode() const { return encode_payment_set(owner, payments); }
};

inline Hash256 leaf_hash(const Bytes& encoded_set, bls::OpCounters* ctr = nullptr) {
    ByteWriter w;
    w.u8(0x00);
    w.raw(encoded_set);
    if (ctr) ctr->hash_evals += 1;
    return sha256(w.bytes());
}

inline Hash256 node_hash(const Hash256& left, const Hash256& right, bls::OpCounters* ctr = nullptr) {
    ByteWriter w;
    w.u8(0x01);
    w.raw(left);
    w.raw(right);
    if (ctr) ctr->hash_evals += 1;
    return sha256(w.bytes());
}

struct MerkleProof {
    Hash256 leaf;
    std::size_t index = 0;
    std::vector<Hash256> siblings;
};

class MerkleTree {
  public:
    // Takes ownership of the sets; the input order is irrelevant because the
    // tree sorts by owner key. Duplicate owners are a construction bug.
    explicit MerkleTree(std::vector<PaymentSet> sets) : sets_(std::move(sets)) {
        if (sets_.empty()) throw std::invalid_argument("empty tree");
        std::sort(sets_.begin(), sets_.end(),
                  [](const PaymentSet& a, const PaymentSet& b) { return a.owner < b.owner; });
        for (std::size_t i = 1; i < sets_.size(); ++i)
            if (sets_[i - 1].owner == sets_[i].owner) throw std::invalid_argument("duplicate leaf owner");
        std::vector<Hash256> level;
        level.reserve(sets_.size());
        for (const auto& s : sets_) level.push_back(leaf_hash(s.encode()));
        levels_.push_back(level);
        while (levels_.back().size() > 1) {
            const auto& below = levels_.back();
            std::vector<Hash256> above;
            above.reserve((below.size() + 1) / 2);
            for (std::size_t i = 0; i < below.size(); i += 2) {
                const Hash256& l = below[i];
                const Hash256& r = (i + 1 < below.size()) ? below[i + 1] : below[i];
                above.push_back(node_hash(l, r));
            }
            levels_.push_back(std::move(above));
        }
    }

    const Hash256& root() const { return levels_.back()[0]; }
    std::size_t height() const { return levels_.size() - 1; }
    const std::vector<PaymentSet>& sets() const { return sets_; }

    std::optional<std::size_t> index_of(const PublicKey& owner) const {
        for (std::size_t i = 0; i < sets_.size(); ++i)
            if (sets_[i].owner == owner) return i;
        return std::nullopt;
    }

    MerkleProof prove(std::size_t index) const {
        if (index >= sets_.size()) throw std::out_of_range("leaf index");
        MerkleProof p;
        p.leaf = levels_[0][index];
        p.index = index;
        std::size_t idx = index;
        for (std::size_t lvl = 0; lvl + 1 < levels_.size(); ++lvl) {
            const auto& nodes = levels_[lvl];
            std::size_t sib = idx ^ 1;
            p.siblings.push_back(sib < nodes.size() ? nodes[sib] : nodes[idx]);
            idx >>= 1;
        }
        return p;
    }

  private:
    std::vector<PaymentSet> sets_;
    std::vector<std::vector<Hash256>> levels_;
};

// Recomputes the root from a proof; costs exactly siblings.size() hashes.
// Hashing the claimed leaf content is the caller's business (leaf_hash).
inline bool check_mp(const MerkleProof& proof, const Hash256& root, bls::OpCounters* ctr = nullptr) {
    Hash256 cur = proof.leaf;
    std::size_t idx = proof.index;
    for (const Hash256& sib : proof.siblings) {
        cur = (idx & 1) ? node_hash(sib, cur, ctr) : node_hash(cur, sib, ctr);
        idx >>= 1;
    }
    return idx == 0 && cur == root;
}

}  // namespace payplace
