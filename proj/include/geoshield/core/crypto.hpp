#pragma once

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "geoshield/core/bytes.hpp"
#include "geoshield/core/ids.hpp"

namespace geoshield::core {

// Wire-size accounting constants. The in-memory representations below are
// simulation-grade; byte accounting always uses these sizes.
inline constexpr std::size_t kWireSignatureBytes = 64;
inline constexpr std::size_t kWireHashBytes = 32;
inline constexpr std::size_t kWireHeaderBytes = 16;

struct Hash128 {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;
    constexpr auto operator<=>(const Hash128&) const = default;

    std::string hex() const {
        char buf[36];
        std::snprintf(buf, sizeof buf, "%016llx%016llx",
                      static_cast<unsigned long long>(hi),
                      static_cast<unsigned long long>(lo));
        return buf;
    }
};

// 128-bit mixing hash (splitmix-style absorption). Good enough as a
// simulation stand-in for a cryptographic digest: nothing inside the harness
// can search for collisions, it can only call this function.
Hash128 hash128(const std::uint8_t* data, std::size_t n, std::uint64_t domain = 0);

inline Hash128 hash128(const std::vector<std::uint8_t>& v, std::uint64_t domain = 0) {
    return hash128(v.data(), v.size(), domain);
}
inline Hash128 hash128(const ByteWriter& w, std::uint64_t domain = 0) {
    return hash128(w.bytes(), domain);
}

// Simulated Ed25519-class signature: sig = H(secret_key_signer || payload).
// A signature verifies only against the claimed signer's key, so within the
// harness a valid signature can only originate from that node's Signer.
struct Signature {
    Hash128 mac;
    NodeId signer;
    constexpr auto operator<=>(const Signature&) const = default;
};

class KeyStore;

// Per-node signing capability. Protocol and adversary code receive the
// Signer for the nodes they run; there is no API to read keys or to sign as
// anyone else, which is what keeps forgery impossible inside the simulation.
class Signer {
  public:
    Signature sign(const ByteWriter& payload) const;
    Signature sign(const std::vector<std::uint8_t>& payload) const;
    NodeId id() const { return id_; }

  private:
    friend class KeyStore;
    Signer(NodeId id, std::uint64_t k0, std::uint64_t k1) : id_(id), k0_(k0), k1_(k1) {}
    NodeId id_;
    std::uint64_t k0_, k1_;
};

class KeyStore {
  public:
    explicit KeyStore(std::uint64_t master_seed);

    // Deterministic per-node key derivation; issuing twice returns an
    // equivalent capability.
    Signer issue(NodeId id) const;

    bool verify(const std::vector<std::uint8_t>& payload, const Signature& sig) const;
    bool verify(const ByteWriter& payload, const Signature& sig) const;

  private:
    void derive(NodeId id, std::uint64_t& k0, std::uint64_t& k1) const;
    std::uint64_t master_;
};

}  // namespace geoshield::core
