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

// Off-chain operator: accepts consumer channel payments, turns purchase
// orders into per-merchant cumulative sets, publishes one block per period,
// collects merchant signatures over its root, and submits the aggregate to
// the contract. Keeps mirrors of on-chain state from the event log; the
// mirrors, not the contract, drive what goes into each submission.

namespace payplace {

struct TicketGrant {
    std::uint64_t tau_r = 0;
    Signature sig;
};

class OperatorAgent {
  public:
    OperatorAgent(bls::KeyPair kp, TimingParams timing, std::uint64_t sign_lag = 1,
                  std::uint64_t fee_per_order = 0)
        : kp_(std::move(kp)), timing_(timing), sign_lag_(sign_lag), fee_per_order_(fee_per_order) {
        if (!(sign_lag_ > 0 && sign_lag_ < timing_.gamma))
            throw std::invalid_argument("signing lag must fall inside the submission window");
        last_signed_[kp_.pk.bytes] = {};  // own fee leaf, present from the start
    }

    const PublicKey& pk() const { return kp_.pk; }

    // when false, purchase orders skip the channel balance check entirely
    bool enforce_balance = true;

    // --- consumer channel intake -------------------------------------------

    ChannelAccept receive_payment(const SignedPayment& sp) {
        auto it = deposits_.find(sp.payment.consumer.bytes);
        return channels_.accept(sp, it == deposits_.end() ? 0 : it->second, nullptr);
    }

    const ChannelTable& channels() const { return channels_; }

    // --- merchant onboarding -----------------------------------------------

    // A merchant asks to join: the operator demands a possession proof before
    // lending its signature, which shuts out aggregation-cancelling keys.
    std::optional<TicketGrant> issue_ticket(const PublicKey& pk_p, const Signature& pop, std::uint64_t now) {
        if (!cache_.verify(pk_p, pk_p.bytes, pop, bls::HashDomain::proof_of_possession)) return std::nullopt;
        credentials_[pk_p.bytes] = pop;
        return TicketGrant{now, bls::sign(kp_.sk, ticket_message(pk_p, now))};
    }

    // --- purchase orders ---------------------------------------------------

    // Consumer c buys `amount` worth from merchant p, settled in the next
    // block. An honest operator only commits funds the channel still covers.
    bool queue_order(const PublicKey& merchant, const PublicKey& consumer, std::uint64_t amount) {
        if (!roster_.count(merchant.bytes)) return false;
        if (enforce_balance) {
            const SignedPayment* latest = channels_.latest(consumer);
            std::uint64_t funded = latest ? latest->payment.mu : 0;
            auto wit = w_star_.find(consumer.bytes);
            std::uint64_t spent = committed_total(consumer.bytes) + (wit == w_star_.end() ? 0 : wit->second);
            auto want = checked_add(amount, fee_per_order_);
            auto need = want ? checked_add(*want, spent) : std::nullopt;
            if (!need || *need > funded) return false;
        }
        orders_.push_back({amount, merchant, consumer});
        if (fee_per_order_ > 0) orders_.push_back({fee_per_order_, kp_.pk, consumer});
        return true;
    }

    // --- period driving ----------------------------------------------------

    // Build and stage the block for the period starting at g = period(now).
    // Every key starts from its leaf in the last notarized tree — missing
    // merchants keep accruing — except fresh registrants and anyone who
    // withdrew since, who start over empty.
    const OperatorBlock& generate_block(std::uint64_t now) {
        std::uint64_t g = now - now % timing_.beta;
        for (auto& o : orders_) included_.push_back(o);
        orders_.clear();

        std::map<Bytes, PaymentSet> leaves;
        leaves[kp_.pk.bytes] = {kp_.pk, carried_set(kp_.pk.bytes)};
        for (const auto& [b, pk] : roster_) {
            if (exited_since_.count(b)) continue;
            leaves[b] = {pk, carried_set(b)};
        }
        for (const auto& d : included_) {
            auto it = leaves.find(d.merchant.bytes);
            if (it == leaves.end()) continue;  // merchant left before inclusion
            apply_delta(it->second.payments, d);
        }

        block_.period_start = g;
        block_.tau = g + sign_lag_;
        block_.sets.clear();
        for (auto& [b, leaf] : leaves) block_.sets.push_back(std::move(leaf));
        block_.root = MerkleTree(block_.sets).root();
        block_.sources = channels_;
        signatures_.clear();
        return block_;
    }

    const OperatorBlock& block() const { return block_; }

    // Collect one merchant's signature over the staged (root, tau); anything
    // that does not verify is dropped so it cannot poison the aggregate.
    bool accept_signature(const PublicKey& pk_p, const Signature& sig) {
        if (!roster_.count(pk_p.bytes)) return false;
        if (!cache_.verify(pk_p, commitment_message(block_.root, block_.tau), sig,
                           bls::HashDomain::standard_msg))
            return false;
        signatures_[pk_p.bytes] = sig;
        return true;
    }

    std::size_t signature_count() const { return signatures_.size(); }

    // Aggregate what came back into one submission. Non-signers are declared
    // missing with whatever evidence their standing requires; merchants the
    // chain tracks as missing who signed again get their old set revealed.
    std::optional<CommitmentSubmission> assemble_submission() {
        if (signatures_.empty()) return std::nullopt;
        CommitmentSubmission sub;
        sub.root = block_.root;
        sub.tau = block_.tau;
        std::vector<Signature> sigs;
        MerkleTree tree(block_.sets);
        std::optional<MerkleTree> prev;
        for (const auto& [b, pk] : roster_) {
            if (exited_since_.count(b)) continue;  // declared below, not missing
            auto sit = signatures_.find(b);
            if (sit != signatures_.end()) {
                bls::fold_key(sub.apk_active, pk.point);
                sigs.push_back(sit->second);
                if (chain_missing_.count(b)) sub.returning.push_back({pk, last_signed_.at(b)});
                continue;
            }
            MissingEvidence ev;
            ev.pk = pk;
            if (!chain_missing_.count(b) && !reg_since_.count(b) && !wd_since_.count(b)) {
                if (!prev) prev.emplace(notarized_sets_);
                ev.pop = credentials_.at(b);
                ev.new_set = tree.sets()[*tree.index_of(pk)].payments;
                ev.new_proof = tree.prove(*tree.index_of(pk));
                ev.old_set = prev->sets()[*prev->index_of(pk)].payments;
                ev.old_proof = prev->prove(*prev->index_of(pk));
            }
            sub.missing.push_back(std::move(ev));
        }
        for (const auto& [b, pk] : exited_since_) sub.exited.push_back(pk);
        sub.agg = *bls::aggregate_signatures(sigs);
        last_submission_ = sub;
        return sub;
    }

    // Replay material for a stale-submission attempt.
    const std::optional<CommitmentSubmission>& previous_submission() const { return last_submission_; }

    // Submission hiding two live signers behind one key equal to their
    // product: the key accounting balances, but no possession proof can exist
    // for the synthetic key. Requires a fully signed block.
    std::optional<CommitmentSubmission> assemble_fabricated() {
        if (signatures_.size() != roster_.size() || roster_.size() < 3) return std::nullopt;
        CommitmentSubmission sub;
        sub.root = block_.root;
        sub.tau = block_.tau;
        std::vector<Signature> sigs;
        bls::G1 fab = bls::G1::identity();
        std::size_t dropped = 0;
        for (const auto& [b, pk] : roster_) {
            if (dropped < 2) {
                bls::fold_key(fab, pk.point);
                ++dropped;
                continue;
            }
            bls::fold_key(sub.apk_active, pk.point);
            sigs.push_back(signatures_.at(b));
        }
        MissingEvidence fake;
        fake.pk = PublicKey::from_point(fab);
        fake.pop = bls::sign(kp_.sk, fake.pk.bytes, bls::HashDomain::proof_of_possession);
        MerkleTree tree(block_.sets);
        fake.new_proof = tree.prove(0);
        fake.old_proof = fake.new_proof;
        sub.missing.push_back(std::move(fake));
        sub.agg = *bls::aggregate_signatures(sigs);
        return sub;
    }

    // --- chain mirror ------------------------------------------------------

    void observe(const ContractEvent& ev) {
        switch (ev.kind) {
            case ContractEvent::Kind::deposit:
                deposits_[ev.subject.bytes] = ev.amount;
                break;
            case ContractEvent::Kind::registration:
                roster_[ev.subject.bytes] = ev.subject;
                reg_since_.insert(ev.subject.bytes);
                last_signed_[ev.subject.bytes] = {};
                break;
            case ContractEvent::Kind::withdrawal:
                for (const auto& d : ev.payload) w_star_[d.consumer.bytes] += d.mu_prime;
                last_signed_[ev.subject.bytes].clear();
                chain_missing_.erase(ev.subject.bytes);
                if (ev.exit)
                    exited_since_[ev.subject.bytes] = ev.subject;
                else
                    wd_since_.insert(ev.subject.bytes);
                break;
            case ContractEvent::Kind::merchant_missing:
                chain_missing_.insert(ev.subject.bytes);
                break;
            case ContractEvent::Kind::merchant_returned:
                chain_missing_.erase(ev.subject.bytes);
                break;
            case ContractEvent::Kind::notarization:
                if (ev.root == block_.root) {
                    for (const auto& leaf : block_.sets) {
                        Bytes b = leaf.owner.bytes;
                        if (b == kp_.pk.bytes || signatures_.count(b)) last_signed_[b] = leaf.payments;
                    }
                    notarized_sets_ = block_.sets;
                    included_.clear();
                }
                for (const auto& [b, pk] : exited_since_) {
                    roster_.erase(b);
                    last_signed_.erase(b);
                    credentials_.erase(b);
                }
                reg_since_.clear();
                wd_since_.clear();
                exited_since_.clear();
                break;
        }
    }

    const std::map<Bytes, PublicKey>& roster() const { return roster_; }
    const std::vector<PaymentSet>& notarized_sets() const { return notarized_sets_; }

  private:
    static void apply_delta(std::vector<MerchantPayment>& set, const MerchantPayment& d) {
        for (auto& t : set) {
            if (t.consumer == d.consumer) {
                auto total = checked_add(t.mu_prime, d.mu_prime);
                if (!total) throw std::overflow_error("assignment overflow");
                t.mu_prime = *total;
                return;
            }
        }
        set.push_back(d);
    }

    // What the key will start the next block with.
    std::vector<MerchantPayment> carried_set(const Bytes& b) const {
        if (wd_since_.count(b) || reg_since_.count(b)) return {};
        for (const auto& leaf : notarized_sets_)
            if (leaf.owner.bytes == b) return leaf.payments;
        return {};
    }

    // Everything already promised out of this consumer's channel, as the next
    // block will state it.
    std::uint64_t committed_total(const Bytes& consumer) const {
        std::uint64_t sum = 0;
        auto add = [&](const Bytes& owner) {
            for (const auto& t : carried_set(owner))
                if (t.consumer.bytes == consumer) sum += t.mu_prime;
        };
        add(kp_.pk.bytes);
        for (const auto& [b, pk] : roster_)
            if (!exited_since_.count(b)) add(b);
        for (const auto& d : orders_)
            if (d.consumer.bytes == consumer) sum += d.mu_prime;
        for (const auto& d : included_)
            if (d.consumer.bytes == consumer) sum += d.mu_prime;
        return sum;
    }

    bls::KeyPair kp_;
    TimingParams timing_;
    std::uint64_t sign_lag_;
    std::uint64_t fee_per_order_;

    ChannelTable channels_;
    bls::VerifyCache cache_;

    std::map<Bytes, PublicKey> roster_;
    std::map<Bytes, Signature> credentials_;        // possession proofs from onboarding
    std::map<Bytes, std::vector<MerchantPayment>> last_signed_;  // per-key notarized set
    std::vector<MerchantPayment> orders_;           // deltas waiting for the next block
    std::vector<MerchantPayment> included_;         // deltas staged in the current block

    // chain mirrors, maintained purely from the event log
    std::map<Bytes, std::uint64_t> deposits_;
    std::map<Bytes, std::uint64_t> w_star_;
    std::set<Bytes> chain_missing_;
    std::set<Bytes> reg_since_, wd_since_;
    std::map<Bytes, PublicKey> exited_since_;

    OperatorBlock block_;
    std::map<Bytes, Signature> signatures_;
    std::vector<PaymentSet> notarized_sets_;
    std::optional<CommitmentSubmission> last_submission_;
};

}  // namespace payplace
