#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

// Analytic cost model for one notarization: the exact operation counts the
// contract performs for a given churn workload, priced in gas, next to a
// ZK-rollup baseline. payplace_gas's breakdown is cross-checked against the
// instrumented contract run for the same workload, so the composition here is
// not free-floating arithmetic.

namespace payplace {

struct WorkloadParams {
    std::uint64_t n = 0;         // payments in the period
    std::uint64_t p_r = 0;       // commitment tree leaves (merchants + fee leaf)
    std::uint64_t p_r_prev = 0;  // leaves of the previous notarized tree; 0 = same as p_r
    std::uint64_t p_u = 0;       // merchants that received payments
    std::uint64_t c_r = 0;       // consumers with open channels
    std::uint64_t c_u = 0;       // avg unique source consumers per merchant
    std::uint64_t p_m = 0;        // non-signers listed missing
    std::uint64_t p_m_prime = 0;  // of those, already tracked missing
    std::uint64_t p_a = 0;        // returning signers whose frozen set carries a real hash
    std::uint64_t p_x = 0;        // exits since the last notarization
    std::uint64_t p_b = 0;        // listed missing straight out of their registration period
    std::uint64_t p_w = 0;        // listed missing straight after a withdrawal
    std::uint64_t z_max = 3000;       // transactions folded into one rollup proof
    std::uint64_t snark_ops = 150000;  // pairings + exponentiations per proof
};

struct GasConstants {
    std::uint64_t pairing_per_input = 34000;
    std::uint64_t pairing_base = 45000;
    std::uint64_t g1_mul = 150;
    std::uint64_t keccak = 42;
    std::uint64_t hash_to_g0 = 100;
    std::uint64_t fixed_overhead = 30000;
    std::uint64_t per_new_missing = 10000;
    std::uint64_t zkr_verify = 300000;
    std::uint64_t zkr_overhead = 50000;
    std::uint64_t calldata_per_byte = 16;
    std::uint64_t bytes_per_tx = 15;

    std::uint64_t pairing_eq(std::uint64_t inputs) const { return pairing_per_input * inputs + pairing_base; }
};

// levels above the leaves of the commitment tree (odd nodes pair with
// themselves, so this is exactly ceil(log2(n)))
inline std::uint64_t merkle_height(std::uint64_t leaves) {
    std::uint64_t h = 0;
    while (leaves > (std::uint64_t{1} << h)) ++h;
    return leaves <= 1 ? 0 : h;
}

struct NotarizationBreakdown {
    std::uint64_t newly_missing = 0;  // first-time non-signers outside the exempt classes
    bool clamped = false;             // exempt classes exceeded the missing list
    std::uint64_t pairings = 0;
    std::uint64_t g1_mults = 0;
    std::uint64_t hash_to_g0 = 0;
    std::uint64_t hash_evals = 0;
    std::uint64_t tree_height_new = 0;
    std::uint64_t tree_height_old = 0;
    std::uint64_t gas = 0;
};

// One notarization, assembled from what the contract actually executes: the
// aggregate-signature pairing check, one batched possession proof covering
// the newly-missing merchants, a key fold per missing or exited merchant, and
// two Merkle walks plus two leaf hashes per newly-missing merchant to pin
// their funds across roots. Recurring non-signers and merchants missing out
// of their registration or withdrawal period cost bookkeeping only.
inline NotarizationBreakdown payplace_gas(const WorkloadParams& w, const GasConstants& g = {}) {
    NotarizationBreakdown b;
    std::uint64_t exempt = w.p_m_prime + w.p_b + w.p_w;
    if (exempt > w.p_m) {
        b.clamped = true;
        b.newly_missing = 0;
    } else {
        b.newly_missing = w.p_m - exempt;
    }
    std::uint64_t k = b.newly_missing;
    b.tree_height_new = merkle_height(w.p_r);
    b.tree_height_old = merkle_height(w.p_r_prev == 0 ? w.p_r : w.p_r_prev);

    b.pairings = 2 + (k > 0 ? k + 1 : 0);
    b.g1_mults = w.p_m + w.p_x;
    b.hash_to_g0 = 1 + k;
    b.hash_evals = w.p_a + 2 * k + k * (b.tree_height_new + b.tree_height_old);

    b.gas = g.pairing_eq(2) + (k > 0 ? g.pairing_eq(k + 1) : 0);
    b.gas += g.g1_mul * b.g1_mults;
    b.gas += g.hash_to_g0 * b.hash_to_g0;
    b.gas += g.keccak * b.hash_evals;
    b.gas += g.fixed_overhead;
    b.gas += g.per_new_missing * (w.p_m - std::min(w.p_m_prime, w.p_m));
    return b;
}

inline std::uint64_t div_ceil(std::uint64_t a, std::uint64_t b) { return a == 0 ? 0 : (a - 1) / b + 1; }

inline std::uint64_t zkr_gas(const WorkloadParams& w, const GasConstants& g = {}) {
    if (w.n == 0) return 0;
    return div_ceil(w.n, w.z_max) * (g.zkr_verify + g.zkr_overhead) + w.n * g.bytes_per_tx * g.calldata_per_byte;
}

struct OffchainOps {
    std::uint64_t operator_ops = 0;
    std::uint64_t per_merchant_ops = 0;
};

// pairings + exponentiations per period: the operator verifies and folds one
// channel head per merchant leaf; each merchant re-verifies one source
// transaction per unique consumer it was paid from
inline OffchainOps payplace_offchain_ops(const WorkloadParams& w) {
    return {2 * w.p_r, 2 * w.c_u};
}

inline std::uint64_t zkr_offchain_ops(const WorkloadParams& w) {
    return div_ceil(w.n, w.z_max) * w.snark_ops;
}

// --- figure grids -----------------------------------------------------------

struct GridPoint {
    std::string series;
    WorkloadParams w;
};

// worst case: orders spread evenly, one unique consumer per order; a larger
// roster than order count leaves c_u at 1 for the merchants that sell at all
inline std::uint64_t max_cu(std::uint64_t n, std::uint64_t p_r) {
    if (p_r == 0) return 0;
    return p_r > n ? 1 : n / p_r;
}

// off-chain load: PayPlace under both consumer-uniqueness regimes against the
// rollup prover, across marketplace sizes
inline std::vector<GridPoint> fig5_grid() {
    std::vector<GridPoint> grid;
    const std::uint64_t rosters[] = {100, 10000, 1000000};
    for (std::uint64_t e = 2; e <= 10; ++e) {
        std::uint64_t n = 1;
        for (std::uint64_t i = 0; i < e; ++i) n *= 10;
        for (std::uint64_t p_r : rosters) {
            WorkloadParams w;
            w.n = n;
            w.p_r = p_r;
            w.c_u = max_cu(n, p_r);
            grid.push_back({"payplace_max_cu_pr" + std::to_string(p_r), w});
            WorkloadParams lim = w;
            lim.c_u = std::min(max_cu(n, p_r), p_r);
            grid.push_back({"payplace_lim_cu_pr" + std::to_string(p_r), lim});
        }
        WorkloadParams z;
        z.n = n;
        grid.push_back({"zkr", z});
    }
    return grid;
}

// notarization gas against churn: a large marketplace where the missing list
// turns over to varying degrees
inline std::vector<GridPoint> fig6_grid() {
    std::vector<GridPoint> grid;
    for (std::uint64_t delta = 100; delta <= 800; delta += 100) {
        for (std::uint64_t p_m : {850, 900, 950, 1000}) {
            WorkloadParams w;
            w.p_r = 1000;
            w.p_m = p_m;
            w.p_m_prime = p_m - delta;
            grid.push_back({"delta" + std::to_string(delta), w});
        }
    }
    return grid;
}

// notarization gas against transaction volume: PayPlace at its worst-case
// churn stays flat while the rollup pays per transaction
inline std::vector<GridPoint> fig7_grid() {
    std::vector<GridPoint> grid;
    std::vector<std::uint64_t> ns = {100, 1000, 3000, 6000, 9000, 12000};
    for (std::uint64_t e = 5; e <= 10; ++e) {
        std::uint64_t n = 1;
        for (std::uint64_t i = 0; i < e; ++i) n *= 10;
        ns.push_back(n);
    }
    for (std::uint64_t n : ns) {
        WorkloadParams w;
        w.n = n;
        w.p_r = 1000000;
        w.p_m = 1000;
        w.p_m_prime = 0;
        grid.push_back({"n_sweep", w});
    }
    return grid;
}

// One row per grid point, all model outputs, stable column order.
inline std::string sweep(const std::vector<GridPoint>& grid, const GasConstants& g = {}) {
    std::ostringstream out;
    out << "# payplace-cost v1\n";
    out << "series,n,p_r,p_m,p_m_prime,p_a,p_x,p_b,p_w,c_u,z_max,newly_missing,pairings,g1_mults,hash_to_g0,"
           "hash_evals,payplace_gas,zkr_gas,payplace_operator_ops,payplace_merchant_ops,payplace_total_ops,zkr_ops\n";
    for (const auto& pt : grid) {
        const WorkloadParams& w = pt.w;
        NotarizationBreakdown b = payplace_gas(w, g);
        OffchainOps ops = payplace_offchain_ops(w);
        std::uint64_t sellers = w.p_r < w.n ? w.p_r : w.n;
        std::uint64_t total_ops = ops.operator_ops + ops.per_merchant_ops * sellers;
        out << pt.series << ',' << w.n << ',' << w.p_r << ',' << w.p_m << ',' << w.p_m_prime << ',' << w.p_a << ','
            << w.p_x << ',' << w.p_b << ',' << w.p_w << ',' << w.c_u << ',' << w.z_max << ',' << b.newly_missing
            << ',' << b.pairings << ',' << b.g1_mults << ',' << b.hash_to_g0 << ',' << b.hash_evals << ',' << b.gas
            << ',' << zkr_gas(w, g) << ',' << ops.operator_ops << ',' << ops.per_merchant_ops << ',' << total_ops
            << ',' << zkr_offchain_ops(w) << '\n';
    }
    return out.str();
}

}  // namespace payplace
