#include "rln/hash.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <stdexcept>

namespace rln {

void HashItem::absorb(ByteWriter& out) const {
    if (const auto* f = std::get_if<FieldElement>(&v_)) {
        out.put_raw(f->to_bytes());
    } else {
        out.put_prefixed(std::get<ByteView>(v_));
    }
}

Digest sha256(ByteView data) {
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size()) {
        throw std::runtime_error("EVP_Digest(sha256) failed");
    }
    return out;
}

Digest hmac_sha256(ByteView key, ByteView data) {
    Digest out{};
    unsigned int len = 0;
    if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(), &len) ==
            nullptr ||
        len != out.size()) {
        throw std::runtime_error("HMAC(sha256) failed");
    }
    return out;
}

FieldElement hash_to_field(Domain domain, std::span<const HashItem> inputs) {
    ByteWriter w;
    w.put_u8(static_cast<std::uint8_t>(domain));
    for (const auto& item : inputs) item.absorb(w);
    return FieldElement::reduce(sha256(w.bytes()));
}

}  // namespace rln
