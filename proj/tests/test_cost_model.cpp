#include <catch2/catch_amalgamated.hpp>

#include "payplace/cost_model.hpp"
#include "payplace/simulator.hpp"

using namespace payplace;

TEST_CASE("notarization gas composes from the published operation prices") {
    SECTION("everyone signs") {
        WorkloadParams w;
        w.p_r = 1000;
        NotarizationBreakdown b = payplace_gas(w);
        CHECK(b.pairings == 2);
        CHECK(b.g1_mults == 0);
        CHECK(b.hash_to_g0 == 1);
        CHECK(b.hash_evals == 0);
        CHECK(b.gas == 143100);
    }

    SECTION("recurring non-signers cost one key fold each") {
        WorkloadParams w;
        w.p_r = 1000;
        w.p_m = 100;
        w.p_m_prime = 100;
        NotarizationBreakdown b = payplace_gas(w);
        CHECK(b.newly_missing == 0);
        CHECK(b.pairings == 2);
        CHECK(b.gas == 143100 + 150 * 100);
    }

    SECTION("worst case: a thousand first-time non-signers in a million-leaf tree") {
        WorkloadParams w;
        w.p_r = 1000000;
        w.p_m = 1000;
        NotarizationBreakdown b = payplace_gas(w);
        CHECK(b.newly_missing == 1000);
        CHECK(b.pairings == 2 + 1001);
        CHECK(b.g1_mults == 1000);
        CHECK(b.hash_to_g0 == 1001);
        CHECK(b.tree_height_new == 20);
        CHECK(b.hash_evals == 2000 + 1000 * 40);
        CHECK(b.gas == 46236100);
    }

    SECTION("registration- and withdrawal-period absences skip the possession batch") {
        WorkloadParams w;
        w.p_r = 64;
        w.p_m = 5;
        w.p_b = 3;
        w.p_w = 2;
        NotarizationBreakdown b = payplace_gas(w);
        CHECK(b.newly_missing == 0);
        CHECK_FALSE(b.clamped);
        CHECK(b.pairings == 2);
        // key folds and missing-entry writes still happen for all five
        CHECK(b.g1_mults == 5);
        CHECK(b.gas == 143100 + 150 * 5 + 10000 * 5);
    }

    SECTION("inconsistent synthetic params clamp instead of wrapping") {
        WorkloadParams w;
        w.p_r = 8;
        w.p_m = 2;
        w.p_m_prime = 5;
        NotarizationBreakdown b = payplace_gas(w);
        CHECK(b.clamped);
        CHECK(b.newly_missing == 0);
        CHECK(b.gas >= 143100);
    }
}

TEST_CASE("notarization gas does not depend on order or consumer volume") {
    WorkloadParams base;
    base.p_r = 4096;
    base.p_m = 40;
    base.p_m_prime = 10;
    base.p_a = 7;
    std::uint64_t ref = payplace_gas(base).gas;
    for (std::uint64_t n : {std::uint64_t{0}, std::uint64_t{1000}, std::uint64_t{100000000}}) {
        WorkloadParams w = base;
        w.n = n;
        w.c_r = n / 10 + 1;
        w.c_u = 17;
        CHECK(payplace_gas(w).gas == ref);
    }
}

TEST_CASE("rollup gas is proof count plus calldata") {
    WorkloadParams w;
    SECTION("empty period") {
        w.n = 0;
        CHECK(zkr_gas(w) == 0);
    }
    SECTION("exactly one proof") {
        w.n = 3000;
        CHECK(zkr_gas(w) == 350000 + 3000 * 240);
        CHECK(zkr_gas(w) == 1070000);
    }
    SECTION("one transaction over the proof capacity") {
        w.n = 3001;
        CHECK(zkr_gas(w) == 2 * 350000 + 3001 * 240);
    }
    SECTION("doubling a proof-aligned load doubles the bill") {
        w.n = 3000;
        WorkloadParams w2 = w;
        w2.n = 6000;
        CHECK(zkr_gas(w2) == 2 * zkr_gas(w));
    }
}

TEST_CASE("per-period off-chain verification load") {
    WorkloadParams w;
    w.n = 1000000;
    w.p_r = 1000;
    w.c_u = max_cu(w.n, w.p_r);
    OffchainOps ops = payplace_offchain_ops(w);
    CHECK(w.c_u == 1000);
    CHECK(ops.operator_ops == 2000);
    CHECK(ops.per_merchant_ops == 2000);

    // more merchants than orders: every seller has a single unique consumer
    CHECK(max_cu(50, 1000) == 1);

    CHECK(zkr_offchain_ops(w) == (1000000 / 3000 + 1) * 150000);
    WorkloadParams idle;
    CHECK(zkr_offchain_ops(idle) == 0);
}

TEST_CASE("model counters match the instrumented contract across churn") {
    auto check_run = [](const Scenario& sc) {
        SimResult r = run(sc);
        REQUIRE(r.safe());
        std::size_t checked = 0;
        for (const auto& rec : r.submissions) {
            if (rec.reason != ReasonCode::ok) continue;
            WorkloadParams w;
            w.p_r = rec.p_r;
            w.p_r_prev = rec.p_r_prev;
            w.p_m = rec.p_m;
            w.p_m_prime = rec.p_m_prime;
            w.p_a = rec.p_a;
            w.p_x = rec.p_x;
            w.p_b = rec.p_b;
            w.p_w = rec.p_w;
            NotarizationBreakdown b = payplace_gas(w);
            INFO(sc.name << " tick " << rec.tick << ": p_r=" << rec.p_r << " p_m=" << rec.p_m << " p_m'="
                         << rec.p_m_prime << " p_a=" << rec.p_a << " p_x=" << rec.p_x << " p_b=" << rec.p_b
                         << " p_w=" << rec.p_w);
            CHECK(rec.counters.pairings == b.pairings);
            CHECK(rec.counters.g1_mults == b.g1_mults);
            CHECK(rec.counters.hash_to_g0 == b.hash_to_g0);
            CHECK(rec.counters.hash_evals == b.hash_evals);
            ++checked;
        }
        return checked;
    };

    std::size_t total = 0;
    total += check_run(appendix_b_scenario());
    total += check_run(appendix_c_scenario());
    for (std::uint64_t seed = 100; seed < 112; ++seed) total += check_run(random_scenario(seed, PolicyId::honest));
    for (std::uint64_t seed = 200; seed < 206; ++seed)
        total += check_run(random_scenario(seed, PolicyId::data_withhold));
    // enough notarizations that returns, dropouts, withdrawals and exits all showed up
    CHECK(total >= 40);
}

TEST_CASE("constant-churn gas spread stays within half a percent") {
    auto grid = fig6_grid();
    REQUIRE(grid.size() == 8 * 4);
    for (std::uint64_t delta = 100; delta <= 800; delta += 100) {
        std::uint64_t lo = UINT64_MAX, hi = 0;
        for (const auto& pt : grid) {
            if (pt.series != "delta" + std::to_string(delta)) continue;
            std::uint64_t gas = payplace_gas(pt.w).gas;
            lo = std::min(lo, gas);
            hi = std::max(hi, gas);
        }
        INFO("delta=" << delta);
        // the only term that moves with p_m at fixed p_m - p_m' is the key fold
        CHECK(hi - lo == 150 * 150);
        CHECK(double(hi - lo) / double(lo) < 0.005);
    }
}

TEST_CASE("volume sweep: flat notarization cost against a linear rollup") {
    auto grid = fig7_grid();
    std::uint64_t ref = 0;
    std::vector<std::uint64_t> zkr_aligned;
    for (const auto& pt : grid) {
        std::uint64_t pp = payplace_gas(pt.w).gas;
        if (ref == 0) ref = pp;
        CHECK(pp == ref);
        if (pt.w.n % 3000 == 0) zkr_aligned.push_back(zkr_gas(pt.w));
    }
    CHECK(ref == 46236100);
    // proof-aligned points sit exactly on one affine line
    REQUIRE(zkr_aligned.size() >= 3);
    for (std::size_t i = 0; i + 1 < zkr_aligned.size(); ++i) CHECK(zkr_aligned[i] < zkr_aligned[i + 1]);

    // the headline comparison point: ten million transactions
    WorkloadParams w;
    w.n = 10000000;
    w.p_r = 1000000;
    w.p_m = 1000;
    CHECK(payplace_gas(w).gas == 46236100);
    CHECK(zkr_gas(w) == 3566900000ULL);
}

TEST_CASE("sweep emits a stable machine-readable table") {
    auto grid = fig7_grid();
    std::string csv = sweep(grid);
    CHECK(csv.rfind("# payplace-cost v1\n", 0) == 0);
    std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == grid.size() + 2);
    CHECK(csv == sweep(grid));
    CHECK(csv.find("payplace_gas") != std::string::npos);

    // fig5 rows carry the regime split
    std::string five = sweep(fig5_grid());
    CHECK(five.find("payplace_max_cu_pr1000000") != std::string::npos);
    CHECK(five.find("payplace_lim_cu_pr100") != std::string::npos);
    CHECK(five.find("zkr") != std::string::npos);
}
