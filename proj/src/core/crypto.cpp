#include "geoshield/core/crypto.hpp"

namespace geoshield::core {

namespace {

constexpr std::uint64_t splitmix(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Hash128 hash128(const std::uint8_t* data, std::size_t n, std::uint64_t domain) {
    // Absorb 8-byte lanes into two accumulators with distinct schedules.
    std::uint64_t a = 0x6a09e667f3bcc908ULL ^ domain;
    std::uint64_t b = 0xbb67ae8584caa73bULL + n;
    std::size_t i = 0;
    while (i + 8 <= n) {
        std::uint64_t lane;
        std::memcpy(&lane, data + i, 8);
        a = splitmix(a ^= lane);
        b = splitmix(b += lane ^ a);
        i += 8;
    }
    std::uint64_t tail = 0x8000000000000000ULL;  // length-extension guard
    for (std::size_t k = 0; i < n; ++i, ++k) tail |= std::uint64_t(data[i]) << (8 * k);
    a = splitmix(a ^= tail);
    b = splitmix(b += tail ^ a);
    a = splitmix(a += b);
    b = splitmix(b ^= a);
    return {a, b};
}

Signature Signer::sign(const ByteWriter& payload) const { return sign(payload.bytes()); }

Signature Signer::sign(const std::vector<std::uint8_t>& payload) const {
    ByteWriter w;
    w.u64(k0_);
    w.u64(k1_);
    w.u32(id_.v);
    w.raw(payload.data(), payload.size());
    return Signature{hash128(w, /*domain=*/0x5167u), id_};
}

KeyStore::KeyStore(std::uint64_t master_seed) : master_(master_seed) {}

void KeyStore::derive(NodeId id, std::uint64_t& k0, std::uint64_t& k1) const {
    std::uint64_t s = master_ ^ (0xda942042e4dd58b5ULL * (id.v + 1));
    k0 = splitmix(s);
    k1 = splitmix(s);
}

Signer KeyStore::issue(NodeId id) const {
    std::uint64_t k0, k1;
    derive(id, k0, k1);
    return Signer(id, k0, k1);
}

bool KeyStore::verify(const std::vector<std::uint8_t>& payload, const Signature& sig) const {
    return issue(sig.signer).sign(payload).mac == sig.mac;
}

bool KeyStore::verify(const ByteWriter& payload, const Signature& sig) const {
    return verify(payload.bytes(), sig);
}

}  // namespace geoshield::core
