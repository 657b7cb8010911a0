#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

namespace payplace {

using Byte = std::uint8_t;
using Bytes = std::vector<Byte>;
using Hash256 = std::array<Byte, 32>;

inline std::string to_hex(std::span<const Byte> data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (Byte b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0F]);
    }
    return out;
}

inline std::string to_hex(const Hash256& h) { return to_hex(std::span<const Byte>(h.data(), h.size())); }

inline Hash256 sha256(std::span<const Byte> data) {
    Hash256 out{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr);
    return out;
}

inline Hash256 sha256(const Bytes& data) { return sha256(std::span<const Byte>(data.data(), data.size())); }

// Canonical serializer: fixed-width big-endian integers plus tagged frames.
// Every signed or hashed payload in the protocol goes through this writer so
// that distinct structures can never serialize to the same byte string.
class ByteWriter {
  public:
    void u8(Byte v) { buf_.push_back(v); }

    void u64(std::uint64_t v) {
        for (int i = 7; i >= 0; --i) buf_.push_back(static_cast<Byte>(v >> (8 * i)));
    }

    void raw(std::span<const Byte> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

    void raw(const Bytes& data) { raw(std::span<const Byte>(data.data(), data.size())); }

    template <std::size_t N>
    void raw(const std::array<Byte, N>& data) {
        raw(std::span<const Byte>(data.data(), N));
    }

    void str(std::string_view s) {
        u64(s.size());
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }

  private:
    Bytes buf_;
};

inline bool bytes_less(const Bytes& a, const Bytes& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace payplace
