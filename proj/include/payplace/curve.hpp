#pragma once

#include <optional>

#include "payplace/fields.hpp"

// Jacobian-coordinate arithmetic for the two pairing source groups.
// G0 lives on E(Fp): y^2 = x^3 + 4 and carries signatures and hashed
// messages; G1 lives on the sextic twist E'(Fp2): y^2 = x^3 + 4(1+i) and
// carries public keys. Group order is the 65-bit prime r for both.

namespace payplace::bls {

template <typename F>
struct CurveTraits;

template <>
struct CurveTraits<Fp> {
    static Fp b() { return Fp::from_u64(params::CURVE_B); }
    static constexpr std::size_t coord_bytes = 12;
    static void write(ByteWriter& w, const Fp& v) { w.raw(v.to_bytes()); }
    static Fp read(std::span<const Byte> in) { return Fp::from_bytes_mod(in); }
};

template <>
struct CurveTraits<Fp2> {
    static Fp2 b() { return Fp2{Fp::from_u64(params::CURVE_B), Fp::from_u64(params::CURVE_B)}; }
    static constexpr std::size_t coord_bytes = 24;
    static void write(ByteWriter& w, const Fp2& v) {
        w.raw(v.a.to_bytes());
        w.raw(v.b.to_bytes());
    }
    static Fp2 read(std::span<const Byte> in) {
        return Fp2{Fp::from_bytes_mod(in.subspan(0, 12)), Fp::from_bytes_mod(in.subspan(12, 12))};
    }
};

template <typename F>
struct Point {
    F x = F::zero(), y = F::zero(), z = F::zero();  // z == 0: identity

    static Point identity() { return {}; }

    static Point from_affine(const F& ax, const F& ay) { return {ax, ay, F::one()}; }

    bool is_identity() const { return z.is_zero(); }

    Point neg() const { return {x, F::zero() - y, z}; }

    Point dbl() const {
        if (is_identity()) return *this;
        F a = x.sqr();
        F b = y.sqr();
        F c = b.sqr();
        F d = ((x + b).sqr() - a - c).dbl();
        F e = a + a + a;
        F f = e.sqr();
        Point r;
        r.x = f - d.dbl();
        r.y = e * (d - r.x) - c.dbl().dbl().dbl();
        r.z = (y * z).dbl();
        return r;
    }

    Point operator+(const Point& o) const {
        if (is_identity()) return o;
        if (o.is_identity()) return *this;
        F z1z1 = z.sqr();
        F z2z2 = o.z.sqr();
        F u1 = x * z2z2;
        F u2 = o.x * z1z1;
        F s1 = y * o.z * z2z2;
        F s2 = o.y * z * z1z1;
        if (u1 == u2) {
            if (s1 == s2) return dbl();
            return identity();
        }
        F h = u2 - u1;
        F i = h.dbl().sqr();
        F j = h * i;
        F rr = (s2 - s1).dbl();
        F v = u1 * i;
        Point r;
        r.x = rr.sqr() - j - v.dbl();
        r.y = rr * (v - r.x) - (s1 * j).dbl();
        r.z = ((z + o.z).sqr() - z1z1 - z2z2) * h;
        return r;
    }

    Point operator-() const { return {x, -y, z}; }
    Point operator-(const Point& o) const { return *this + (-o); }

    Point mul(u128 k) const {
        Point acc = identity();
        if (k == 0 || is_identity()) return acc;
        int top = 127;
        while (top > 0 && !((k >> top) & 1)) --top;
        for (int i = top; i >= 0; --i) {
            acc = acc.dbl();
            if ((k >> i) & 1) acc = acc + *this;
        }
        return acc;
    }

    struct Affine {
        F x, y;
        bool infinity;
    };

    Affine to_affine() const {
        if (is_identity()) return {F::zero(), F::zero(), true};
        F zi = z.inv();
        F zi2 = zi.sqr();
        return {x * zi2, y * zi2 * zi, false};
    }

    bool on_curve() const {
        if (is_identity()) return true;
        // y^2 = x^3 + b z^6
        F z2 = z.sqr();
        F z6 = z2.sqr() * z2;
        return y.sqr() == x.sqr() * x + CurveTraits<F>::b() * z6;
    }

    bool in_subgroup() const { return mul(params::ORDER_R).is_identity(); }

    bool operator==(const Point& o) const {
        if (is_identity() || o.is_identity()) return is_identity() == o.is_identity();
        F z1z1 = z.sqr();
        F z2z2 = o.z.sqr();
        if (!(x * z2z2 == o.x * z1z1)) return false;
        return y * o.z * z2z2 == o.y * z * z1z1;
    }
    bool operator!=(const Point& o) const { return !(*this == o); }

    Bytes serialize() const {
        ByteWriter w;
        auto aff = to_affine();
        if (aff.infinity) {
            w.u8(0x00);
            for (std::size_t i = 0; i < 2 * CurveTraits<F>::coord_bytes; ++i) w.u8(0);
        } else {
            w.u8(0x01);
            CurveTraits<F>::write(w, aff.x);
            CurveTraits<F>::write(w, aff.y);
        }
        return w.take();
    }

    static constexpr std::size_t serialized_size = 1 + 2 * CurveTraits<F>::coord_bytes;

    // Validating deserialization: accepts only on-curve order-r points.
    static std::optional<Point> deserialize(std::span<const Byte> in) {
        if (in.size() != serialized_size) return std::nullopt;
        if (in[0] == 0x00) {
            for (std::size_t i = 1; i < in.size(); ++i)
                if (in[i] != 0) return std::nullopt;
            return identity();
        }
        if (in[0] != 0x01) return std::nullopt;
        constexpr std::size_t n = CurveTraits<F>::coord_bytes;
        Point p = from_affine(CurveTraits<F>::read(in.subspan(1, n)), CurveTraits<F>::read(in.subspan(1 + n, n)));
        if (!p.on_curve() || !p.in_subgroup()) return std::nullopt;
        return p;
    }
};

using G0 = Point<Fp>;   // signature group, E(Fp)
using G1 = Point<Fp2>;  // key group, E'(Fp2)

inline const G0& g0_generator() {
    static const G0 gen = [] {
        G0 g = G0::from_affine(Fp::from_u128((static_cast<u128>(0x362343fbull) << 64) | 0x83c2763bb8549f52ull),
                               Fp::from_u128((static_cast<u128>(0x55c95429ull) << 64) | 0xaf6a6a6c82f70e20ull));
        assert(g.on_curve() && g.in_subgroup() && !g.is_identity());
        return g;
    }();
    return gen;
}

inline const G1& g1_generator() {
    static const G1 gen = [] {
        Fp2 gx{Fp::from_u128((static_cast<u128>(0x0471612aull) << 64) | 0xc9f3d3a5c0657f42ull),
               Fp::from_u128((static_cast<u128>(0x29bec4c3ull) << 64) | 0xea3266b347f1d57bull)};
        Fp2 gy{Fp::from_u128((static_cast<u128>(0x1ab9c6f7ull) << 64) | 0xf7ed429ef2ba6046ull),
               Fp::from_u128((static_cast<u128>(0x263b6e0full) << 64) | 0x3271cf0b7f947b07ull)};
        G1 g = G1::from_affine(gx, gy);
        assert(g.on_curve() && g.in_subgroup() && !g.is_identity());
        return g;
    }();
    return gen;
}

}  // namespace payplace::bls
