#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "rln/bytes.hpp"

namespace rln {

// Scalar field order of BN254 (alt_bn128), the field used by deployed RLN circuits.
inline constexpr std::string_view kFieldModulusHex =
    "30644e72e131a029b85045b68181585d2833e84879b9709143e1f593f0000001";

inline constexpr std::size_t kFieldBytes = 32;

// Element of the prime field F_p. Always held in canonical form, value < p.
// Not constant-time.
class FieldElement {
public:
    using Uint = boost::multiprecision::uint256_t;
    using Repr = std::array<std::uint8_t, kFieldBytes>;

    FieldElement() = default;
    explicit FieldElement(std::uint64_t v);

    static const Uint& modulus();

    // Rejects encodings >= p.
    static std::optional<FieldElement> from_bytes(ByteView be32);
    // Interprets 32 big-endian bytes as an integer and reduces it mod p.
    static FieldElement reduce(ByteView be32);
    static std::optional<FieldElement> from_hex(std::string_view hex);

    Repr to_bytes() const;
    std::string to_hex() const;
    const Uint& value() const { return v_; }
    bool is_zero() const { return v_.is_zero(); }

    FieldElement operator+(const FieldElement& o) const;
    FieldElement operator-(const FieldElement& o) const;
    FieldElement operator*(const FieldElement& o) const;
    FieldElement operator-() const;
    FieldElement& operator+=(const FieldElement& o) { return *this = *this + o; }
    FieldElement& operator-=(const FieldElement& o) { return *this = *this - o; }
    FieldElement& operator*=(const FieldElement& o) { return *this = *this * o; }

    FieldElement pow(const Uint& exponent) const;
    // Throws std::domain_error for zero.
    FieldElement inverse() const;

    friend bool operator==(const FieldElement&, const FieldElement&) = default;
    friend std::strong_ordering operator<=>(const FieldElement& a, const FieldElement& b) {
        if (a.v_ < b.v_) return std::strong_ordering::less;
        if (a.v_ > b.v_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

private:
    explicit FieldElement(Uint v) : v_(std::move(v)) {}

    Uint v_{};
};

}  // namespace rln

template <>
struct std::hash<rln::FieldElement> {
    std::size_t operator()(const rln::FieldElement& f) const noexcept {
        auto b = f.to_bytes();
        std::size_t h = 0;
        for (std::size_t i = 24; i < 32; ++i) h = (h << 8) | b[i];
        return h;
    }
};
