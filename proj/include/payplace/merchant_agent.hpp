#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "payplace/block.hpp"
#include "payplace/contract.hpp"

// Off-chain merchant: decides every period whether the operator's block is
// worth signing, tracking everything it needs — channel deposits, withdrawn
// totals, which merchants the chain holds missing and with what funds — from
// the contract's event log. Signing is the merchant's only lever, so all
// protocol safety for it hangs on these checks.

namespace payplace {

enum class SignRefusal {
    signed_ok,
    outside_window,
    malformed_block,
    own_set_regressed,
    bad_source,
    missing_not_carried,
    channel_overdraft,
};

inline const char* refusal_name(SignRefusal r) {
    switch (r) {
        case SignRefusal::signed_ok: return "signed";
        case SignRefusal::outside_window: return "window";
        case SignRefusal::malformed_block: return "malformed-block";
        case SignRefusal::own_set_regressed: return "own-set-regression";
        case SignRefusal::bad_source: return "bad-source";
        case SignRefusal::missing_not_carried: return "missing-not-carried";
        case SignRefusal::channel_overdraft: return "channel-overdraft";
    }
    return "?";
}

class MerchantAgent {
  public:
    MerchantAgent(bls::KeyPair kp, PublicKey operator_pk, TimingParams timing)
        : kp_(std::move(kp)), op_pk_(std::move(operator_pk)), timing_(timing) {}

    const PublicKey& pk() const { return kp_.pk; }
    Signature possession_proof() const { return bls::pop_create(kp_.sk, kp_.pk); }
    const std::vector<MerchantPayment>& last_signed() const { return last_signed_; }
    bool tracked_missing() const { return im_missing_; }

    struct Decision {
        SignRefusal verdict = SignRefusal::signed_ok;
        std::optional<Signature> sig;
    };

    // The per-period gate: verify the operator's block from scratch and sign
    // its root only if every claim in it is funded and nothing this merchant
    // depends on has been dropped or rolled back.
    Decision consider(const OperatorBlock& blk, std::uint64_t now) {
        std::uint64_t g = now - now % timing_.beta;
        if (!(blk.tau > g && blk.tau < g + timing_.gamma)) return {SignRefusal::outside_window, {}};

        const std::vector<MerchantPayment>* own = nullptr;
        for (const auto& leaf : blk.sets)
            if (leaf.owner == kp_.pk) {
                own = &leaf.payments;
                break;
            }
        if (!own) return {SignRefusal::own_set_regressed, {}};
        if (!has_withdrawn_ && !payment_set_dominates(*own, last_signed_))
            return {SignRefusal::own_set_regressed, {}};

        // every claim of ours needs a live, funded channel transaction
        std::map<Bytes, std::uint64_t> funded, claimed;
        std::map<Bytes, SignedPayment> matched;
        for (const auto& t : *own) {
            auto dit = deposited_.find(t.consumer.bytes);
            auto src = get_source_transaction(blk.sources, t.consumer,
                                              dit == deposited_.end() ? 0 : dit->second, &cache_);
            if (!src) return {SignRefusal::bad_source, {}};
            funded[t.consumer.bytes] = src->payment.mu;
            claimed[t.consumer.bytes] = 0;
            matched[t.consumer.bytes] = *src;
        }

        // merchants the chain tracks as missing must keep their frozen funds
        for (const auto& [b, frozen] : missing_sets_) {
            if (withdrawn_since_.count(b)) continue;
            const std::vector<MerchantPayment>* leaf = nullptr;
            for (const auto& l : blk.sets)
                if (l.owner.bytes == b) {
                    leaf = &l.payments;
                    break;
                }
            if (!leaf || !payment_set_dominates(*leaf, frozen)) return {SignRefusal::missing_not_carried, {}};
        }

        // everyone's claims on our consumers, ours included, must fit inside
        // what those consumers have actually signed over, less withdrawals
        for (const auto& leaf : blk.sets)
            for (const auto& t : leaf.payments) {
                auto it = claimed.find(t.consumer.bytes);
                if (it == claimed.end()) continue;
                auto total = checked_add(it->second, t.mu_prime);
                if (!total) return {SignRefusal::channel_overdraft, {}};
                it->second = *total;
            }
        for (const auto& [c, spent] : claimed) {
            auto wit = w_star_.find(c);
            auto burden = checked_add(spent, wit == w_star_.end() ? 0 : wit->second);
            if (!burden || *burden > funded[c]) return {SignRefusal::channel_overdraft, {}};
        }

        Hash256 root;
        try {
            root = MerkleTree(blk.sets).root();
        } catch (const std::invalid_argument&) {
            return {SignRefusal::malformed_block, {}};
        }
        if (root != blk.root) return {SignRefusal::malformed_block, {}};

        pending_root_ = root;
        pending_sets_ = blk.sets;
        pending_own_ = *own;
        pending_sources_ = std::move(matched);
        pending_valid_ = true;
        return {SignRefusal::signed_ok, bls::sign(kp_.sk, commitment_message(root, blk.tau))};
    }

    // --- chain mirror ------------------------------------------------------

    void observe(const ContractEvent& ev) {
        switch (ev.kind) {
            case ContractEvent::Kind::deposit:
                deposited_[ev.subject.bytes] = ev.amount;
                break;
            case ContractEvent::Kind::registration:
                break;
            case ContractEvent::Kind::withdrawal:
                for (const auto& d : ev.payload) w_star_[d.consumer.bytes] += d.mu_prime;
                withdrawn_since_.insert(ev.subject.bytes);
                missing_sets_.erase(ev.subject.bytes);
                if (ev.subject == kp_.pk) {
                    has_withdrawn_ = true;
                    im_missing_ = false;
                    last_signed_.clear();
                    pending_valid_ = false;
                }
                break;
            case ContractEvent::Kind::merchant_missing:
                missing_sets_[ev.subject.bytes] = ev.payload;
                if (ev.subject == kp_.pk) im_missing_ = true;
                break;
            case ContractEvent::Kind::merchant_returned:
                missing_sets_.erase(ev.subject.bytes);
                if (ev.subject == kp_.pk) im_missing_ = false;
                break;
            case ContractEvent::Kind::notarization:
                if (!im_missing_ && pending_valid_ && ev.root == pending_root_) {
                    last_signed_ = pending_own_;
                    has_withdrawn_ = false;
                    notarized_sets_ = pending_sets_;
                    for (auto& [c, sp] : pending_sources_) {
                        auto it = sources_.find(c);
                        if (it == sources_.end() || it->second.payment.mu < sp.payment.mu) sources_[c] = sp;
                    }
                }
                pending_valid_ = false;
                withdrawn_since_.clear();
                break;
        }
    }

    // --- withdrawal --------------------------------------------------------

    // Assemble the claim for everything this merchant can currently prove:
    // against the stored set hash when tracked missing, against the last
    // notarized root it signed otherwise.
    std::optional<WithdrawalRequest> make_withdrawal(bool exit) const {
        WithdrawalRequest req;
        req.pk = kp_.pk;
        req.exit = exit;
        req.set = last_signed_;
        if (!im_missing_) {
            if (notarized_sets_.empty()) {
                if (!last_signed_.empty()) return std::nullopt;
            } else {
                MerkleTree tree(notarized_sets_);
                auto idx = tree.index_of(kp_.pk);
                if (!idx) return std::nullopt;
                req.set = tree.sets()[*idx].payments;
                req.proof = tree.prove(*idx);
            }
        }
        for (const auto& t : req.set) {
            auto it = sources_.find(t.consumer.bytes);
            if (it == sources_.end()) return std::nullopt;
            req.sources.push_back(it->second);
        }
        return req;
    }

  private:
    bls::KeyPair kp_;
    PublicKey op_pk_;
    TimingParams timing_;
    bls::VerifyCache cache_;

    std::vector<MerchantPayment> last_signed_;  // what the chain can hold us to
    bool has_withdrawn_ = false;
    bool im_missing_ = false;

    Hash256 pending_root_{};
    std::vector<PaymentSet> pending_sets_;
    std::vector<MerchantPayment> pending_own_;
    std::map<Bytes, SignedPayment> pending_sources_;
    bool pending_valid_ = false;

    std::vector<PaymentSet> notarized_sets_;  // last tree we signed that stuck
    std::map<Bytes, SignedPayment> sources_;  // best channel transaction per consumer

    std::map<Bytes, std::uint64_t> deposited_;
    std::map<Bytes, std::uint64_t> w_star_;
    std::map<Bytes, std::vector<MerchantPayment>> missing_sets_;
    std::set<Bytes> withdrawn_since_;
};

}  // namespace payplace
