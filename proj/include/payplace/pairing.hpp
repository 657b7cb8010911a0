#pragma once

#include <utility>
#include <vector>

#include "payplace/curve.hpp"

// Reduced Tate pairing e: G0 x G1 -> GT with denominator elimination.
// The Miller loop runs over the G0 argument (base-field point arithmetic);
// the G1 argument is untwisted into Fp12 once per pairing. With the tower
// w^6 = xi, a twist point (x', y') maps to (x'/xi * v^2, y'/xi * v * w),
// so every line evaluation is sparse in the w^k basis: a constant in Fp,
// a v^2 coefficient and a v*w coefficient. Vertical lines land in Fp6 and
// are erased by the final exponentiation, so they are dropped.
//
// The final exponentiation computes f^(3 * (p^12-1)/r) using the BLS12
// hard-part identity 3*(p^4-p^2+1)/r = (u-1)^2 * (u+p) * (u^2+p^2-1) + 3.
// The cube is harmless: x -> x^3 is a bijection on GT (gcd(3, r) = 1), so
// bilinearity, non-degeneracy and every product-equation check survive.

namespace payplace::bls {

using GT = Fp12;

struct G1Prepared {
    Fp2 x_scaled, y_scaled;  // x'/xi, y'/xi
    bool infinity = true;
};

inline G1Prepared prepare_g1(const G1& q) {
    G1Prepared out;
    if (q.is_identity()) return out;
    auto aff = q.to_affine();
    static const Fp2 xi_inv = Fp2{Fp::one(), Fp::one()}.inv();
    out.x_scaled = aff.x * xi_inv;
    out.y_scaled = aff.y * xi_inv;
    out.infinity = false;
    return out;
}

namespace detail {

struct SparseLine {
    Fp c;      // w^0 slot, base-field scalar
    Fp2 c_v2;  // v^2 slot
    Fp2 c_vw;  // v*w slot
};

// f * (c + c_v2 * v^2 + c_vw * v * w), specialized for the sparse line shape
inline Fp12 mul_sparse(const Fp12& f, const SparseLine& l) {
    const Fp2& A0 = f.c0.c0;
    const Fp2& A1 = f.c0.c1;
    const Fp2& A2 = f.c0.c2;
    const Fp2& B0 = f.c1.c0;
    const Fp2& B1 = f.c1.c1;
    const Fp2& B2 = f.c1.c2;
    const Fp& a = l.c;
    const Fp2& cv = l.c_v2;
    const Fp2& bw = l.c_vw;
    Fp12 r;
    r.c0.c0 = A0.mul_fp(a) + (cv * A1).mul_xi() + (bw * B1).mul_xi();
    r.c0.c1 = A1.mul_fp(a) + (cv * A2).mul_xi() + (bw * B2).mul_xi();
    r.c0.c2 = A2.mul_fp(a) + cv * A0 + bw * B0;
    r.c1.c0 = B0.mul_fp(a) + (cv * B1).mul_xi() + (bw * A2).mul_xi();
    r.c1.c1 = B1.mul_fp(a) + (cv * B2).mul_xi() + bw * A0;
    r.c1.c2 = B2.mul_fp(a) + cv * B0 + bw * A1;
    return r;
}

struct MillerState {
    Fp px, py;       // base point, affine
    Fp x, y, z;      // running multiple, jacobian
    G1Prepared q;
};

// Line through T (tangent) evaluated at Q, scaled by 2YZ^3; then T <- 2T.
//   l = (3X^3 - 2Y^2) - 3X^2 Z^2 * x_Q + 2YZ^3 * y_Q
inline SparseLine dbl_step(MillerState& s) {
    Fp a = s.x.sqr();
    Fp b = s.y.sqr();
    Fp c = b.sqr();
    Fp d = ((s.x + b).sqr() - a - c).dbl();
    Fp e = a + a + a;
    Fp z2 = s.z.sqr();
    Fp z3 = (s.y * s.z * z2).dbl();  // 2YZ^3

    SparseLine line;
    line.c = e * s.x - b.dbl();
    line.c_v2 = s.q.x_scaled.mul_fp(-(e * z2));
    line.c_vw = s.q.y_scaled.mul_fp(z3);

    Fp znew = (s.y * s.z).dbl();
    s.x = e.sqr() - d.dbl();
    s.y = e * (d - s.x) - c.dbl().dbl().dbl();
    s.z = znew;
    return line;
}

// Line through T and the base point P evaluated at Q, scaled by -(x_T - x_P)Z;
// then T <- T + P (mixed addition).
inline SparseLine add_step(MillerState& s) {
    Fp z2 = s.z.sqr();
    Fp u2 = s.px * z2;        // x_P Z^2
    Fp s2 = s.py * z2 * s.z;  // y_P Z^3
    Fp h = u2 - s.x;
    Fp rr = s2 - s.y;
    Fp h2 = h.sqr();
    Fp h3 = h2 * h;
    Fp v = s.x * h2;
    Fp znew = s.z * h;

    SparseLine line;
    line.c = znew * s.py - rr * s.px;
    line.c_v2 = s.q.x_scaled.mul_fp(rr);
    line.c_vw = s.q.y_scaled.mul_fp(-znew);

    s.x = rr.sqr() - h3 - v.dbl();
    s.y = rr * (v - s.x) - s.y * h3;
    s.z = znew;
    return line;
}

}  // namespace detail

// Shared-squaring Miller loop over any number of (G0, G1) pairs; pairs with
// an identity on either side contribute the neutral factor.
inline Fp12 miller_loop(const std::vector<std::pair<G0, G1Prepared>>& pairs) {
    std::vector<detail::MillerState> states;
    states.reserve(pairs.size());
    for (const auto& [p, q] : pairs) {
        if (p.is_identity() || q.infinity) continue;
        auto aff = p.to_affine();
        states.push_back({aff.x, aff.y, aff.x, aff.y, Fp::one(), q});
    }
    Fp12 f = Fp12::one();
    if (states.empty()) return f;
    for (int i = 63; i >= 0; --i) {
        f = f.sqr();
        for (auto& st : states) f = detail::mul_sparse(f, detail::dbl_step(st));
        if ((params::ORDER_R >> i) & 1) {
            for (auto& st : states) f = detail::mul_sparse(f, detail::add_step(st));
        }
    }
    return f;
}

inline Fp12 final_exponentiation(const Fp12& f) {
    // easy part: f^((p^6 - 1)(p^2 + 1))
    Fp12 g = f.conj() * f.inv();
    g = frobenius2(g) * g;
    // hard part: g^((u-1)^2 (u+p) (u^2+p^2-1)) * g^3 = g^(3 (p^4-p^2+1)/r)
    const u128 u = params::CURVE_U;
    Fp12 t0 = g.pow(u - 1).pow(u - 1);
    Fp12 t1 = t0.pow(u) * frobenius(t0);
    Fp12 t2 = t1.pow(u).pow(u) * frobenius2(t1) * t1.conj();
    return t2 * g.sqr() * g;
}

inline GT pairing(const G0& p, const G1& q) {
    return final_exponentiation(miller_loop({{p, prepare_g1(q)}}));
}

// Product equation: prod e(P_i, Q_i) == 1
inline bool pairing_product_is_one(const std::vector<std::pair<G0, G1Prepared>>& pairs) {
    return final_exponentiation(miller_loop(pairs)).is_one();
}

}  // namespace payplace::bls
