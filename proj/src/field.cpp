#include "rln/field.hpp"

#include <stdexcept>

namespace rln {

namespace mp = boost::multiprecision;
using Wide = mp::uint512_t;

namespace {
FieldElement::Uint parse_modulus() {
    FieldElement::Uint v = 0;
    for (char c : kFieldModulusHex) {
        int d = (c >= 'a') ? c - 'a' + 10 : c - '0';
        v = (v << 4) | d;
    }
    return v;
}

FieldElement::Uint load_be(ByteView be32) {
    FieldElement::Uint v = 0;
    for (auto b : be32) v = (v << 8) | b;
    return v;
}
}  // namespace

const FieldElement::Uint& FieldElement::modulus() {
    static const Uint p = parse_modulus();
    return p;
}

FieldElement::FieldElement(std::uint64_t v) : v_(v) {}

std::optional<FieldElement> FieldElement::from_bytes(ByteView be32) {
    if (be32.size() != kFieldBytes) return std::nullopt;
    Uint v = load_be(be32);
    if (v >= modulus()) return std::nullopt;
    return FieldElement(v);
}

FieldElement FieldElement::reduce(ByteView be32) {
    if (be32.size() != kFieldBytes) throw std::invalid_argument("FieldElement::reduce expects 32 bytes");
    return FieldElement(Uint(load_be(be32) % modulus()));
}

std::optional<FieldElement> FieldElement::from_hex(std::string_view hex) {
    auto bytes = rln::from_hex(hex);
    if (!bytes || bytes->size() != kFieldBytes) return std::nullopt;
    return from_bytes(*bytes);
}

FieldElement::Repr FieldElement::to_bytes() const {
    Repr out{};
    Uint v = v_;
    for (std::size_t i = kFieldBytes; i-- > 0;) {
        out[i] = static_cast<std::uint8_t>(v & 0xff);
        v >>= 8;
    }
    return out;
}

std::string FieldElement::to_hex() const {
    auto b = to_bytes();
    return rln::to_hex(b);
}

FieldElement FieldElement::operator+(const FieldElement& o) const {
    // p < 2^254, so the sum fits in 256 bits.
    Uint s = v_ + o.v_;
    if (s >= modulus()) s -= modulus();
    return FieldElement(s);
}

FieldElement FieldElement::operator-(const FieldElement& o) const {
    if (v_ >= o.v_) return FieldElement(Uint(v_ - o.v_));
    return FieldElement(Uint(modulus() - (o.v_ - v_)));
}

FieldElement FieldElement::operator-() const {
    if (v_.is_zero()) return *this;
    return FieldElement(Uint(modulus() - v_));
}

FieldElement FieldElement::operator*(const FieldElement& o) const {
    Wide w = Wide(v_) * Wide(o.v_);
    w %= Wide(modulus());
    return FieldElement(w.convert_to<Uint>());
}

FieldElement FieldElement::pow(const Uint& exponent) const {
    FieldElement result(1);
    FieldElement base = *this;
    Uint e = exponent;
    while (!e.is_zero()) {
        if (mp::bit_test(e, 0)) result *= base;
        base *= base;
        e >>= 1;
    }
    return result;
}

FieldElement FieldElement::inverse() const {
    if (is_zero()) throw std::domain_error("inverse of zero field element");
    return pow(modulus() - 2);
}

}  // namespace rln
