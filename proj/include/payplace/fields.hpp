#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <span>

#include "payplace/bytes.hpp"

// Finite-field tower for a BLS12-family pairing curve with a 95-bit base field.
// The curve was generated from the standard BLS12 parameterization
//   r = u^4 - u^2 + 1,  p = (u-1)^2 * r / 3 + u,  t = u + 1
// with u = 0x10168, chosen so that p fits in two 64-bit limbs (fast Montgomery
// arithmetic), p = 3 mod 4, p = 1 mod 6, and xi = 1 + i is a non-square
// non-cube in Fp2, giving the usual tower
//   Fp2 = Fp[i]/(i^2 + 1), Fp6 = Fp2[v]/(v^3 - xi), Fp12 = Fp6[w]/(w^2 - v).

namespace payplace::bls {

using u128 = unsigned __int128;

namespace params {

inline constexpr std::uint64_t P_LO = 0x19bbc44f67fd4723ull;
inline constexpr std::uint64_t P_HI = 0x00000000582e9bcbull;
inline constexpr u128 P = (static_cast<u128>(P_HI) << 64) | P_LO;

inline constexpr u128 ORDER_R = (static_cast<u128>(1ull) << 64) | 0x05abe8a28e4f15c1ull;
inline constexpr std::uint64_t CURVE_U = 0x10168ull;
inline constexpr std::uint64_t CURVE_B = 4;
inline constexpr std::uint64_t COFACTOR_G0 = 0x5645527bull;
inline constexpr u128 COFACTOR_G1 = (static_cast<u128>(0x1db7894f84aeec62ull) << 64) | 0x186f355f0025b345ull;

consteval std::uint64_t compute_n0inv() {
    std::uint64_t x = 1;
    for (int i = 0; i < 6; ++i) x *= 2 - P_LO * x;
    return ~x + 1;  // -p^{-1} mod 2^64
}
inline constexpr std::uint64_t N0INV = compute_n0inv();
static_assert(static_cast<std::uint64_t>(N0INV * P_LO) == static_cast<std::uint64_t>(-1));

consteval std::array<std::uint64_t, 2> compute_r2() {
    std::uint64_t lo = 1, hi = 0;
    for (int i = 0; i < 256; ++i) {
        hi = (hi << 1) | (lo >> 63);
        lo <<= 1;
        u128 v = (static_cast<u128>(hi) << 64) | lo;
        if (v >= P) {
            v -= P;
            lo = static_cast<std::uint64_t>(v);
            hi = static_cast<std::uint64_t>(v >> 64);
        }
    }
    return {lo, hi};
}
inline constexpr std::array<std::uint64_t, 2> R2 = compute_r2();

}  // namespace params

struct Fp {
    std::uint64_t v0 = 0, v1 = 0;  // montgomery form

    static Fp zero() { return {}; }

    static Fp from_u128(u128 x) {
        Fp out;
        x %= params::P;
        out.v0 = static_cast<std::uint64_t>(x);
        out.v1 = static_cast<std::uint64_t>(x >> 64);
        return mont_mul(out, Fp{params::R2[0], params::R2[1]});
    }

    static Fp from_u64(std::uint64_t x) { return from_u128(x); }

    static Fp one() {
        static const Fp v = from_u64(1);
        return v;
    }

    static Fp from_bytes_mod(std::span<const Byte> data) {
        u128 acc = 0;
        for (Byte b : data) acc = ((acc << 8) | b) % params::P;
        return from_u128(acc);
    }

    u128 value() const {
        Fp plain = mont_mul(*this, Fp{1, 0});
        return (static_cast<u128>(plain.v1) << 64) | plain.v0;
    }

    std::array<Byte, 12> to_bytes() const {
        u128 x = value();
        std::array<Byte, 12> out{};
        for (int i = 11; i >= 0; --i) {
            out[i] = static_cast<Byte>(x);
            x >>= 8;
        }
        return out;
    }

    static Fp mont_mul(const Fp& a, const Fp& b) {
        using params::N0INV;
        using params::P_HI;
        using params::P_LO;
        std::uint64_t t0 = 0, t1 = 0, t2 = 0;
        const std::uint64_t al[2] = {a.v0, a.v1};
        const std::uint64_t bl[2] = {b.v0, b.v1};
        for (int i = 0; i < 2; ++i) {
            u128 x = static_cast<u128>(al[i]) * bl[0] + t0;
            std::uint64_t carry = static_cast<std::uint64_t>(x >> 64);
            t0 = static_cast<std::uint64_t>(x);
            x = static_cast<u128>(al[i]) * bl[1] + t1 + carry;
            t1 = static_cast<std::uint64_t>(x);
            t2 += static_cast<std::uint64_t>(x >> 64);

            std::uint64_t m = t0 * N0INV;
            x = static_cast<u128>(m) * P_LO + t0;
            carry = static_cast<std::uint64_t>(x >> 64);
            x = static_cast<u128>(m) * P_HI + t1 + carry;
            t0 = static_cast<std::uint64_t>(x);
            t1 = t2 + static_cast<std::uint64_t>(x >> 64);
            t2 = 0;
        }
        u128 v = (static_cast<u128>(t1) << 64) | t0;
        if (v >= params::P) v -= params::P;
        return Fp{static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(v >> 64)};
    }

    Fp operator*(const Fp& o) const { return mont_mul(*this, o); }

    Fp operator+(const Fp& o) const {
        u128 v = ((static_cast<u128>(v1) << 64) | v0) + ((static_cast<u128>(o.v1) << 64) | o.v0);
        if (v >= params::P) v -= params::P;
        return Fp{static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(v >> 64)};
    }

    Fp operator-(const Fp& o) const {
        u128 lhs = (static_cast<u128>(v1) << 64) | v0;
        u128 rhs = (static_cast<u128>(o.v1) << 64) | o.v0;
        u128 v = lhs >= rhs ? lhs - rhs : lhs + params::P - rhs;
        return Fp{static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(v >> 64)};
    }

    Fp operator-() const { return Fp::zero() - *this; }

    Fp dbl() const { return *this + *this; }
    Fp sqr() const { return mont_mul(*this, *this); }

    Fp pow(u128 e) const {
        Fp base = *this;
        Fp acc = Fp::one();
        while (e) {
            if (e & 1) acc = acc * base;
            base = base.sqr();
            e >>= 1;
        }
        return acc;
    }

    Fp inv() const { return pow(params::P - 2); }

    bool is_zero() const { return v0 == 0 && v1 == 0; }
    bool operator==(const Fp& o) const { return v0 == o.v0 && v1 == o.v1; }
    bool operator!=(const Fp& o) const { return !(*this == o); }

    // p = 3 mod 4: sqrt(a) = a^((p+1)/4) when a is a square
    bool legendre_is_square() const {
        if (is_zero()) return true;
        return pow((params::P - 1) / 2) == Fp::one();
    }

    Fp sqrt() const { return pow((params::P + 1) / 4); }
};

struct Fp2 {
    Fp a, b;  // a + b*i

    static Fp2 zero() { return {}; }
    static Fp2 one() { return {Fp::one(), Fp::zero()}; }

    bool is_zero() const { return a.is_zero() && b.is_zero(); }
    bool operator==(const Fp2& o) const { return a == o.a && b == o.b; }
    bool operator!=(const Fp2& o) const { return !(*this == o); }

    Fp2 operator+(const Fp2& o) const { return {a + o.a, b + o.b}; }
    Fp2 operator-(const Fp2& o) const { return {a - o.a, b - o.b}; }
    Fp2 operator-() const { return {-a, -b}; }

    Fp2 operator*(const Fp2& o) const {
        Fp t0 = a * o.a;
        Fp t1 = b * o.b;
        Fp t2 = (a + b) * (o.a + o.b);
        return {t0 - t1, t2 - t0 - t1};
    }

    Fp2 sqr() const {
        Fp t0 = (a + b) * (a - b);
        Fp t1 = (a * b).dbl();
        return {t0, t1};
    }

    Fp2 dbl() const { return {a.dbl(), b.dbl()}; }
    Fp2 conj() const { return {a, -b}; }

    Fp2 mul_fp(const Fp& s) const { return {a * s, b * s}; }

    // multiply by xi = 1 + i
    Fp2 mul_xi() const { return {a - b, a + b}; }

    Fp2 inv() const {
        Fp norm = a.sqr() + b.sqr();
        Fp d = norm.inv();
        return {a * d, -(b * d)};
    }

    Fp2 pow(u128 e) const {
        Fp2 base = *this;
        Fp2 acc = Fp2::one();
        while (e) {
            if (e & 1) acc = acc * base;
            base = base.sqr();
            e >>= 1;
        }
        return acc;
    }
};

struct Fp6 {
    Fp2 c0, c1, c2;  // c0 + c1*v + c2*v^2

    static Fp6 zero() { return {}; }
    static Fp6 one() { return {Fp2::one(), Fp2::zero(), Fp2::zero()}; }

    bool is_zero() const { return c0.is_zero() && c1.is_zero() && c2.is_zero(); }
    bool operator==(const Fp6& o) const { return c0 == o.c0 && c1 == o.c1 && c2 == o.c2; }

    Fp6 operator+(const Fp6& o) const { return {c0 + o.c0, c1 + o.c1, c2 + o.c2}; }
    Fp6 operator-(const Fp6& o) const { return {c0 - o.c0, c1 - o.c1, c2 - o.c2}; }
    Fp6 operator-() const { return {-c0, -c1, -c2}; }

    Fp6 operator*(const Fp6& o) const {
        Fp2 v0 = c0 * o.c0;
        Fp2 v1 = c1 * o.c1;
        Fp2 v2 = c2 * o.c2;
        Fp2 r0 = v0 + ((c1 + c2) * (o.c1 + o.c2) - v1 - v2).mul_xi();
        Fp2 r1 = (c0 + c1) * (o.c0 + o.c1) - v0 - v1 + v2.mul_xi();
        Fp2 r2 = (c0 + c2) * (o.c0 + o.c2) - v0 - v2 + v1;
        return {r0, r1, r2};
    }

    Fp6 sqr() const { return *this * *this; }

    Fp6 mul_by_v() const { return {c2.mul_xi(), c0, c1}; }
    Fp6 mul_fp2(const Fp2& s) const { return {c0 * s, c1 * s, c2 * s}; }

    Fp6 inv() const {
        Fp2 t0 = c0.sqr() - (c1 * c2).mul_xi();
        Fp2 t1 = c2.sqr().mul_xi() - c0 * c1;
        Fp2 t2 = c1.sqr() - c0 * c2;
        Fp2 den = c0 * t0 + (c2 * t1).mul_xi() + (c1 * t2).mul_xi();
        Fp2 d = den.inv();
        return {t0 * d, t1 * d, t2 * d};
    }
};

struct Fp12 {
    Fp6 c0, c1;  // c0 + c1*w

    static Fp12 zero() { return {}; }
    static Fp12 one() { return {Fp6::one(), Fp6::zero()}; }

    bool operator==(const Fp12& o) const { return c0 == o.c0 && c1 == o.c1; }
    bool operator!=(const Fp12& o) const { return !(*this == o); }
    bool is_one() const { return *this == one(); }

    Fp12 operator+(const Fp12& o) const { return {c0 + o.c0, c1 + o.c1}; }
    Fp12 operator-(const Fp12& o) const { return {c0 - o.c0, c1 - o.c1}; }
    Fp12 operator-() const { return {-c0, -c1}; }

    Fp12 operator*(const Fp12& o) const {
        Fp6 aa = c0 * o.c0;
        Fp6 bb = c1 * o.c1;
        Fp6 r1 = (c0 + c1) * (o.c0 + o.c1) - aa - bb;
        return {aa + bb.mul_by_v(), r1};
    }

    Fp12 sqr() const {
        Fp6 u = c0 * c1;
        Fp6 t = (c0 + c1) * (c0 + c1.mul_by_v());
        return {t - u - u.mul_by_v(), u + u};
    }

    // f^(p^6): valid inverse for unitary elements (the cyclotomic subgroup)
    Fp12 conj() const { return {c0, -c1}; }

    Fp12 inv() const {
        Fp6 den = c0.sqr() - c1.sqr().mul_by_v();
        Fp6 d = den.inv();
        return {c0 * d, -(c1 * d)};
    }

    Fp12 pow(u128 e) const {
        Fp12 base = *this;
        Fp12 acc = Fp12::one();
        while (e) {
            if (e & 1) acc = acc * base;
            base = base.sqr();
            e >>= 1;
        }
        return acc;
    }
};

// Frobenius endomorphism on the w^k basis: for f = sum a_k w^k with a_k in Fp2,
// f^p = sum conj(a_k) gamma1[k] w^k where gamma1[k] = xi^(k(p-1)/6), and
// f^(p^2) = sum a_k gamma2[k] w^k with gamma2[k] = gamma1[k]^(p+1).
struct FrobeniusTable {
    std::array<Fp2, 6> gamma1, gamma2;

    FrobeniusTable() {
        const Fp2 xi{Fp::one(), Fp::one()};
        const u128 e = (params::P - 1) / 6;
        gamma1[0] = Fp2::one();
        gamma1[1] = xi.pow(e);
        for (int k = 2; k < 6; ++k) gamma1[k] = gamma1[k - 1] * gamma1[1];
        for (int k = 0; k < 6; ++k) gamma2[k] = gamma1[k] * gamma1[k].conj();
    }
};

inline const FrobeniusTable& frobenius_table() {
    static const FrobeniusTable tbl;
    return tbl;
}

namespace detail {

inline std::array<Fp2, 6> to_wk(const Fp12& f) {
    return {f.c0.c0, f.c1.c0, f.c0.c1, f.c1.c1, f.c0.c2, f.c1.c2};
}

inline Fp12 from_wk(const std::array<Fp2, 6>& a) {
    return {Fp6{a[0], a[2], a[4]}, Fp6{a[1], a[3], a[5]}};
}

}  // namespace detail

inline Fp12 frobenius(const Fp12& f) {
    const auto& tbl = frobenius_table();
    auto a = detail::to_wk(f);
    for (int k = 0; k < 6; ++k) a[k] = a[k].conj() * tbl.gamma1[k];
    return detail::from_wk(a);
}

inline Fp12 frobenius2(const Fp12& f) {
    const auto& tbl = frobenius_table();
    auto a = detail::to_wk(f);
    for (int k = 0; k < 6; ++k) a[k] = a[k] * tbl.gamma2[k];
    return detail::from_wk(a);
}

}  // namespace payplace::bls
