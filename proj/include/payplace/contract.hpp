#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "payplace/channel.hpp"
#include "payplace/merkle.hpp"

// On-chain side of the protocol: a single contract instance that takes
// consumer deposits, registers merchants against operator-issued tickets,
// notarizes operator block commitments, and pays out merchant withdrawals.
//
// The contract never stores the merchant roster or any payment data. It keeps
// only aggregate keys, the last notarized root, hashes of non-signers' last
// signed sets, and per-consumer reservation totals; everything else is
// re-supplied and re-verified per call.

namespace payplace {

// Period layout, in ticks. Each period spans [k*beta, (k+1)*beta): the block
// for period k is generated at k*beta, signatures are collected and the
// commitment submitted inside (k*beta, k*beta + gamma), and registrations and
// withdrawals are only accepted in the quiet middle of the period, delta ticks
// clear of either boundary.
struct TimingParams {
    std::uint64_t beta = 16;
    std::uint64_t gamma = 2;
    std::uint64_t delta = 1;
};

enum class ReasonCode {
    ok,
    // registration
    reg_window,
    reg_stale_ticket,
    reg_key_known,
    reg_bad_ticket,
    reg_bad_pop,
    // commitment verification
    commit_stale_timestamp,
    commit_window,
    commit_returning_set_mismatch,
    commit_exited_listed_missing,
    commit_malformed,
    commit_key_accounting,
    commit_unknown_exited,
    commit_bad_signature,
    commit_missing_pop,
    commit_missing_proof,
    commit_shrinking_set,
    // withdrawal
    wd_window,
    wd_ineligible,
    wd_set_mismatch,
    wd_bad_proof,
    wd_bad_source,
};

inline const char* reason_name(ReasonCode r) {
    switch (r) {
        case ReasonCode::ok: return "ok";
        case ReasonCode::reg_window: return "registration-window";
        case ReasonCode::reg_stale_ticket: return "stale-ticket";
        case ReasonCode::reg_key_known: return "key-already-known";
        case ReasonCode::reg_bad_ticket: return "bad-ticket-signature";
        case ReasonCode::reg_bad_pop: return "registration-pop-failed";
        case ReasonCode::commit_stale_timestamp: return "stale-timestamp";
        case ReasonCode::commit_window: return "submission-window";
        case ReasonCode::commit_returning_set_mismatch: return "returning-set-mismatch";
        case ReasonCode::commit_exited_listed_missing: return "exited-listed-missing";
        case ReasonCode::commit_malformed: return "malformed-submission";
        case ReasonCode::commit_key_accounting: return "key-accounting";
        case ReasonCode::commit_unknown_exited: return "unknown-exited";
        case ReasonCode::commit_bad_signature: return "bad-aggregate-signature";
        case ReasonCode::commit_missing_pop: return "pop-failed";
        case ReasonCode::commit_missing_proof: return "membership-proof-failed";
        case ReasonCode::commit_shrinking_set: return "shrinking-set";
        case ReasonCode::wd_window: return "withdrawal-window";
        case ReasonCode::wd_ineligible: return "ineligible";
        case ReasonCode::wd_set_mismatch: return "set-mismatch";
        case ReasonCode::wd_bad_proof: return "withdrawal-proof-failed";
        case ReasonCode::wd_bad_source: return "bad-source-transaction";
    }
    return "?";
}

// True when `newer` extends `older`: every entry of `older` reappears for the
// same consumer with an equal or larger cumulative total.
inline bool payment_set_dominates(const std::vector<MerchantPayment>& newer,
                                  const std::vector<MerchantPayment>& older) {
    for (const auto& o : older) {
        bool covered = false;
        for (const auto& n : newer) {
            if (n.consumer == o.consumer) {
                covered = n.mu_prime >= o.mu_prime;
                break;
            }
        }
        if (!covered) return false;
    }
    return true;
}

// Marker stored as the set hash for a non-signer with no notarized funds
// (went missing straight out of registration or right after a withdrawal).
inline const Hash256& empty_set_sentinel() {
    static const Hash256 h = sha256(Bytes{0x00});
    return h;
}

// A merchant back in the signing set after being tracked as missing: the
// submission reveals the set it last signed so reservations can be released.
struct ReturningSigner {
    PublicKey pk;
    std::vector<MerchantPayment> last_signed;
};

// Evidence for a merchant missing from this commitment's signer set for the
// first time. The possession proof is the one relayed at registration; both
// membership proofs plus the superset rule pin its funds across the root
// change. All fields except pk are ignored for merchants already tracked
// missing, or registered/withdrawn since the last notarization.
struct MissingEvidence {
    PublicKey pk;
    Signature pop;
    std::vector<MerchantPayment> new_set;
    MerkleProof new_proof;
    std::vector<MerchantPayment> old_set;
    MerkleProof old_proof;
};

struct CommitmentSubmission {
    Hash256 root{};
    std::uint64_t tau = 0;
    bls::G1 apk_active = bls::G1::identity();  // aggregate key of the signers
    Signature agg;                             // their aggregate signature on (root, tau)
    std::vector<MissingEvidence> missing;      // M_t
    std::vector<PublicKey> exited;             // X_t
    std::vector<ReturningSigner> returning;
};

struct WithdrawalRequest {
    PublicKey pk;
    bool exit = false;                      // permanent deregistration
    std::vector<MerchantPayment> set;       // full owned set, one entry per consumer
    MerkleProof proof;                      // against the last root; unused when tracked missing
    std::vector<SignedPayment> sources;     // revealed consumer->operator transactions
};

struct WithdrawalOutcome {
    ReasonCode reason = ReasonCode::ok;
    std::uint64_t transferred = 0;
    std::map<Bytes, std::uint64_t> per_consumer;  // debit against each consumer channel
};

struct ContractEvent {
    enum class Kind { deposit, registration, notarization, merchant_missing, merchant_returned, withdrawal };
    Kind kind;
    std::uint64_t time = 0;
    PublicKey subject;                     // consumer or merchant the event is about
    std::uint64_t amount = 0;              // deposit total / withdrawal transfer
    Hash256 root{};                        // notarization only
    bool exit = false;                     // withdrawal only
    std::vector<MerchantPayment> payload;  // merchant_missing: the set it last signed
};

struct ConsumerLedgerEntry {
    std::uint64_t deposited = 0;  // D
    std::uint64_t mu_prime = 0;   // largest channel total revealed on-chain
    std::uint64_t w_star = 0;     // total withdrawn against this channel
};

class Contract {
  public:
    explicit Contract(PublicKey pk_omega, TimingParams timing = {})
        : pk_omega_(std::move(pk_omega)), timing_(timing) {
        if (!(timing_.gamma + 2 * timing_.delta < timing_.beta))
            throw std::invalid_argument("period too short for its windows");
    }

    // --- timing ------------------------------------------------------------

    std::uint64_t period_start(std::uint64_t now) const { return now - now % timing_.beta; }

    // Registrations and withdrawals are only accepted here, clear of the
    // submission window and of the inclusion-delay guard bands.
    bool in_open_window(std::uint64_t now) const {
        std::uint64_t r = now % timing_.beta;
        return r > timing_.gamma + timing_.delta && r < timing_.beta - timing_.delta;
    }

    bool in_submission_window(std::uint64_t now) const {
        return now % timing_.beta < timing_.gamma;
    }

    const TimingParams& timing() const { return timing_; }

    // --- consumer side -----------------------------------------------------

    void deposit(const PublicKey& consumer, std::uint64_t amount, std::uint64_t now) {
        auto& entry = ledger_[consumer.bytes];
        auto total = checked_add(entry.deposited, amount);
        if (!total) throw std::overflow_error("deposit overflow");
        entry.deposited = *total;
        ContractEvent ev{ContractEvent::Kind::deposit, now, consumer, entry.deposited};
        events_.push_back(std::move(ev));
    }

    // --- merchant registration ---------------------------------------------

    ReasonCode register_merchant(const PublicKey& pk_p, std::uint64_t tau_r, const Signature& ticket,
                                 const Signature& pop, std::uint64_t now) {
        ctr_.reset();
        if (!in_open_window(now)) return fail(ReasonCode::reg_window);
        if (tau_r <= s_) return fail(ReasonCode::reg_stale_ticket);
        if (registered_.count(pk_p.bytes) || exited_.count(pk_p.bytes) || missing_.count(pk_p.bytes) ||
            withdrawn_.count(pk_p.bytes))
            return fail(ReasonCode::reg_key_known);
        if (!bls::verify(pk_omega_, ticket_message(pk_p, tau_r), ticket, bls::HashDomain::standard_msg, &ctr_))
            return fail(ReasonCode::reg_bad_ticket);
        if (!bls::pop_verify(pk_p, pop, &ctr_)) return fail(ReasonCode::reg_bad_pop);
        bls::fold_key(apk_, pk_p.point, &ctr_);
        registered_.insert(pk_p.bytes);
        events_.push_back({ContractEvent::Kind::registration, now, pk_p});
        return ReasonCode::ok;
    }

    // --- notarization ------------------------------------------------------

    ReasonCode verify_commitment(const CommitmentSubmission& sub, std::uint64_t now) {
        ctr_.reset();
        std::uint64_t g = period_start(now);
        if (sub.tau <= g) return fail(ReasonCode::commit_stale_timestamp);
        if (!(sub.tau <= now && now < g + timing_.gamma)) return fail(ReasonCode::commit_window);

        std::set<Bytes> missing_t, exited_t;
        for (const auto& m : sub.missing)
            if (!missing_t.insert(m.pk.bytes).second) return fail(ReasonCode::commit_malformed);
        for (const auto& x : sub.exited)
            if (!exited_t.insert(x.bytes).second) return fail(ReasonCode::commit_malformed);

        // non-signers back in the fold must reveal the set they last signed
        struct Release {
            std::uint64_t gap;
            const std::vector<MerchantPayment>* set;
            const PublicKey* pk;
        };
        std::vector<Release> releases;
        for (const auto& [pk_bytes, gap] : missing_) {
            if (missing_t.count(pk_bytes) || exited_t.count(pk_bytes)) continue;
            const ReturningSigner* found = nullptr;
            for (const auto& ret : sub.returning)
                if (ret.pk.bytes == pk_bytes) {
                    found = &ret;
                    break;
                }
            if (!found) return fail(ReasonCode::commit_returning_set_mismatch);
            const Hash256& stored = set_hashes_.at(pk_bytes);
            if (stored == empty_set_sentinel()) {
                if (!found->last_signed.empty()) return fail(ReasonCode::commit_returning_set_mismatch);
            } else if (leaf_hash(encode_payment_set(found->pk, found->last_signed), &ctr_) != stored) {
                return fail(ReasonCode::commit_returning_set_mismatch);
            }
            releases.push_back({gap, &found->last_signed, &found->pk});
        }

        // an exited merchant cannot simultaneously be tracked as missing
        for (const auto& pk_bytes : missing_t)
            if (exited_.count(pk_bytes)) return fail(ReasonCode::commit_exited_listed_missing);

        Bytes msg = commitment_message(sub.root, sub.tau);
        bls::G1 new_apk = apk_;
        bool full = missing_t.empty() && exited_t.empty() && sub.apk_active == apk_;
        std::vector<std::pair<Hash256, const MissingEvidence*>> fresh;  // stored hash + evidence

        if (full) {
            // everyone signed: a single aggregate check settles it
            if (!bls::verify_point(apk_, msg, sub.agg.point, bls::HashDomain::standard_msg, &ctr_))
                return fail(ReasonCode::commit_bad_signature);
        } else {
            // every registered key must be accounted for: signers + missing + exited
            bls::G1 acc = sub.apk_active;
            for (const auto& m : sub.missing) bls::fold_key(acc, m.pk.point, &ctr_);
            new_apk = acc;  // signers + missing survive into the next period
            for (const auto& x : sub.exited) bls::fold_key(acc, x.point, &ctr_);
            if (!(acc == apk_)) return fail(ReasonCode::commit_key_accounting);
            for (const auto& x : sub.exited)
                if (!exited_.count(x.bytes)) return fail(ReasonCode::commit_unknown_exited);
            if (!bls::verify_point(sub.apk_active, msg, sub.agg.point, bls::HashDomain::standard_msg, &ctr_))
                return fail(ReasonCode::commit_bad_signature);

            // first-time non-signers outside B and W prove key possession and
            // that their funds carried over into the new root
            std::vector<std::pair<bls::PublicKey, bls::Signature>> pops;
            std::vector<const MissingEvidence*> checked;
            for (const auto& m : sub.missing) {
                if (missing_.count(m.pk.bytes)) continue;  // recurring, already tracked
                if (registered_.count(m.pk.bytes) || withdrawn_.count(m.pk.bytes)) {
                    fresh.push_back({empty_set_sentinel(), &m});  // no notarized funds yet
                    continue;
                }
                pops.push_back({m.pk, m.pop});
                checked.push_back(&m);
            }
            if (!pops.empty() && !bls::pop_verify_batch(pops, &ctr_)) return fail(ReasonCode::commit_missing_pop);
            for (const MissingEvidence* m : checked) {
                if (leaf_hash(encode_payment_set(m->pk, m->new_set), &ctr_) != m->new_proof.leaf ||
                    !check_mp(m->new_proof, sub.root, &ctr_))
                    return fail(ReasonCode::commit_missing_proof);
                Hash256 old_leaf = leaf_hash(encode_payment_set(m->pk, m->old_set), &ctr_);
                if (old_leaf != m->old_proof.leaf || !check_mp(m->old_proof, last_root_, &ctr_))
                    return fail(ReasonCode::commit_missing_proof);
                if (!payment_set_dominates(m->new_set, m->old_set)) return fail(ReasonCode::commit_shrinking_set);
                fresh.push_back({old_leaf, m});
            }
        }

        // accepted: commit the state transition
        for (const auto& rel : releases) {
            release_reservation(rel.gap, *rel.set);
            missing_.erase(rel.pk->bytes);
            set_hashes_.erase(rel.pk->bytes);
            events_.push_back({ContractEvent::Kind::merchant_returned, now, *rel.pk});
        }
        // surviving reservations age by one period along with their owners
        for (auto& [pk_bytes, gap] : missing_) gap += 1;
        if (!reservations_.empty()) {
            std::map<std::uint64_t, std::map<Bytes, std::uint64_t>> shifted;
            for (auto& [gap, per_consumer] : reservations_) shifted.emplace(gap + 1, std::move(per_consumer));
            reservations_ = std::move(shifted);
        }
        for (const auto& [stored_hash, m] : fresh) {
            missing_[m->pk.bytes] = 1;
            set_hashes_[m->pk.bytes] = stored_hash;
            bool funded = !(stored_hash == empty_set_sentinel());
            if (funded)
                for (const auto& t : m->old_set) reservations_[1][t.consumer.bytes] += t.mu_prime;
            ContractEvent ev{ContractEvent::Kind::merchant_missing, now, m->pk};
            if (funded) ev.payload = m->old_set;
            events_.push_back(std::move(ev));
        }
        apk_ = new_apk;
        apk_a_ = sub.apk_active;
        last_root_ = sub.root;
        s_ = sub.tau;
        registered_.clear();
        withdrawn_.clear();
        exited_.clear();
        ContractEvent ev{ContractEvent::Kind::notarization, now, pk_omega_};
        ev.root = sub.root;
        events_.push_back(std::move(ev));
        return ReasonCode::ok;
    }

    // --- withdrawal --------------------------------------------------------

    WithdrawalOutcome withdraw(const WithdrawalRequest& req, std::uint64_t now) {
        ctr_.reset();
        WithdrawalOutcome out = compute_withdrawal(req, now, &ctr_);
        if (out.reason != ReasonCode::ok) return out;
        for (const auto& sp : req.sources) {
            auto& entry = ledger_[sp.payment.consumer.bytes];
            if (sp.payment.mu > entry.mu_prime) entry.mu_prime = sp.payment.mu;
        }
        for (const auto& [c, debit] : out.per_consumer) ledger_[c].w_star += debit;
        auto it = missing_.find(req.pk.bytes);
        if (it != missing_.end()) {
            release_reservation(it->second, req.set);
            missing_.erase(it);
            set_hashes_.erase(req.pk.bytes);
        }
        if (req.exit)
            exited_.insert(req.pk.bytes);
        else
            withdrawn_.insert(req.pk.bytes);
        ContractEvent ev{ContractEvent::Kind::withdrawal, now, req.pk, out.transferred};
        ev.exit = req.exit;
        for (const auto& [c, debit] : out.per_consumer) {
            auto cpk = PublicKey::from_bytes(c);
            if (cpk) ev.payload.push_back({debit, req.pk, *cpk});
        }
        events_.push_back(std::move(ev));
        return out;
    }

    // Same computation with no state change: what would p get right now?
    WithdrawalOutcome preview_withdraw(const WithdrawalRequest& req, std::uint64_t now) const {
        bls::OpCounters scratch;
        return compute_withdrawal(req, now, &scratch);
    }

    // --- views -------------------------------------------------------------

    const PublicKey& operator_key() const { return pk_omega_; }
    const bls::G1& apk() const { return apk_; }
    const bls::G1& apk_active_last() const { return apk_a_; }
    const Hash256& last_root() const { return last_root_; }
    std::uint64_t last_notarization_time() const { return s_; }
    const std::map<Bytes, std::uint64_t>& missing() const { return missing_; }
    const std::map<Bytes, Hash256>& set_hashes() const { return set_hashes_; }
    const std::map<std::uint64_t, std::map<Bytes, std::uint64_t>>& reservations() const { return reservations_; }
    const std::set<Bytes>& registered_since_last() const { return registered_; }
    const std::set<Bytes>& withdrawn_since_last() const { return withdrawn_; }
    const std::set<Bytes>& exited_since_last() const { return exited_; }
    ConsumerLedgerEntry ledger(const PublicKey& consumer) const {
        auto it = ledger_.find(consumer.bytes);
        return it == ledger_.end() ? ConsumerLedgerEntry{} : it->second;
    }
    const std::map<Bytes, ConsumerLedgerEntry>& full_ledger() const { return ledger_; }
    const std::vector<ContractEvent>& events() const { return events_; }
    const bls::OpCounters& last_counters() const { return ctr_; }
    ReasonCode last_reason() const { return last_reason_; }

    Hash256 state_hash() const {
        ByteWriter w;
        w.str("ppstate");
        w.raw(pk_omega_.bytes);
        w.raw(apk_.serialize());
        w.raw(apk_a_.serialize());
        w.u64(s_);
        w.raw(last_root_);
        w.u64(ledger_.size());
        for (const auto& [c, e] : ledger_) {
            w.raw(c);
            w.u64(e.deposited);
            w.u64(e.mu_prime);
            w.u64(e.w_star);
        }
        w.u64(missing_.size());
        for (const auto& [pk, gap] : missing_) {
            w.raw(pk);
            w.u64(gap);
        }
        w.u64(set_hashes_.size());
        for (const auto& [pk, h] : set_hashes_) {
            w.raw(pk);
            w.raw(h);
        }
        w.u64(reservations_.size());
        for (const auto& [gap, per_consumer] : reservations_) {
            w.u64(gap);
            w.u64(per_consumer.size());
            for (const auto& [c, amt] : per_consumer) {
                w.raw(c);
                w.u64(amt);
            }
        }
        auto write_set = [&w](const std::set<Bytes>& s) {
            w.u64(s.size());
            for (const auto& k : s) w.raw(k);
        };
        write_set(registered_);
        write_set(withdrawn_);
        write_set(exited_);
        return sha256(w.bytes());
    }

  private:
    ReasonCode fail(ReasonCode r) {
        last_reason_ = r;
        return r;
    }

    void release_reservation(std::uint64_t gap, const std::vector<MerchantPayment>& set) {
        auto cohort = reservations_.find(gap);
        if (cohort == reservations_.end()) return;
        for (const auto& t : set) {
            auto it = cohort->second.find(t.consumer.bytes);
            if (it == cohort->second.end()) continue;
            it->second -= t.mu_prime < it->second ? t.mu_prime : it->second;
            if (it->second == 0) cohort->second.erase(it);
        }
        if (cohort->second.empty()) reservations_.erase(cohort);
    }

    WithdrawalOutcome compute_withdrawal(const WithdrawalRequest& req, std::uint64_t now,
                                         bls::OpCounters* ctr) const {
        WithdrawalOutcome out;
        auto reject = [&out](ReasonCode r) {
            out.reason = r;
            out.transferred = 0;
            out.per_consumer.clear();
            return out;
        };
        if (!in_open_window(now)) return reject(ReasonCode::wd_window);
        if (exited_.count(req.pk.bytes) || registered_.count(req.pk.bytes) || withdrawn_.count(req.pk.bytes))
            return reject(ReasonCode::wd_ineligible);

        std::uint64_t gap = 0;
        auto mit = missing_.find(req.pk.bytes);
        if (mit != missing_.end()) {
            gap = mit->second;
            const Hash256& stored = set_hashes_.at(req.pk.bytes);
            if (stored == empty_set_sentinel()) {
                if (!req.set.empty()) return reject(ReasonCode::wd_set_mismatch);
            } else if (leaf_hash(encode_payment_set(req.pk, req.set), ctr) != stored) {
                return reject(ReasonCode::wd_set_mismatch);
            }
        } else {
            if (leaf_hash(encode_payment_set(req.pk, req.set), ctr) != req.proof.leaf ||
                !check_mp(req.proof, last_root_, ctr))
                return reject(ReasonCode::wd_bad_proof);
        }

        // one source transaction per set entry; anything extra would go unverified
        if (req.sources.size() != req.set.size()) return reject(ReasonCode::wd_bad_source);
        std::set<Bytes> seen;
        for (const auto& t : req.set) {
            if (!seen.insert(t.consumer.bytes).second) return reject(ReasonCode::wd_bad_source);
            const SignedPayment* src = nullptr;
            for (const auto& sp : req.sources)
                if (sp.payment.consumer == t.consumer) {
                    src = &sp;
                    break;
                }
            if (!src) return reject(ReasonCode::wd_bad_source);
            auto lit = ledger_.find(t.consumer.bytes);
            std::uint64_t deposited = lit == ledger_.end() ? 0 : lit->second.deposited;
            if (!bls::verify(src->payment.consumer, payment_message(src->payment), src->sig,
                             bls::HashDomain::standard_msg, ctr) ||
                src->payment.mu > deposited)
                return reject(ReasonCode::wd_bad_source);

            std::uint64_t mu_prime_c = lit == ledger_.end() ? 0 : lit->second.mu_prime;
            if (src->payment.mu > mu_prime_c) mu_prime_c = src->payment.mu;
            std::uint64_t w_star = lit == ledger_.end() ? 0 : lit->second.w_star;

            // funds locked for merchants missing at least as long as p,
            // not counting p's own reservation (released by this withdrawal)
            std::uint64_t reserved = 0;
            std::uint64_t from = gap == 0 ? 1 : gap;
            for (auto rit = reservations_.lower_bound(from); rit != reservations_.end(); ++rit) {
                auto cit = rit->second.find(t.consumer.bytes);
                if (cit != rit->second.end()) reserved += cit->second;
            }
            if (gap > 0) {
                // own contribution sits in cohort `gap` and equals this entry
                std::uint64_t own = t.mu_prime;
                reserved -= own < reserved ? own : reserved;
            }

            std::uint64_t locked = reserved + w_star;  // both bounded by past deposits
            std::uint64_t avail = mu_prime_c > locked ? mu_prime_c - locked : 0;
            std::uint64_t take = avail < t.mu_prime ? avail : t.mu_prime;
            auto new_total = checked_add(out.transferred, take);
            if (!new_total) return reject(ReasonCode::wd_bad_source);
            out.transferred = *new_total;
            if (take > 0) out.per_consumer[t.consumer.bytes] += take;
        }
        return out;
    }

    PublicKey pk_omega_;
    TimingParams timing_;

    bls::G1 apk_ = bls::G1::identity();    // every registered key folded in
    bls::G1 apk_a_ = bls::G1::identity();  // signer aggregate of the last notarization
    Hash256 last_root_{};
    std::uint64_t s_ = 0;  // timestamp of the last notarized commitment

    std::map<Bytes, std::uint64_t> missing_;     // pk -> periods missed
    std::map<Bytes, Hash256> set_hashes_;        // pk -> hash of set last signed
    std::map<std::uint64_t, std::map<Bytes, std::uint64_t>> reservations_;  // gap -> consumer -> locked
    std::set<Bytes> registered_;  // since last notarization
    std::set<Bytes> withdrawn_;
    std::set<Bytes> exited_;
    std::map<Bytes, ConsumerLedgerEntry> ledger_;

    std::vector<ContractEvent> events_;
    bls::OpCounters ctr_;
    ReasonCode last_reason_ = ReasonCode::ok;
};

}  // namespace payplace
