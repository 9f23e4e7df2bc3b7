#include "bftkv/crypto.hpp"

#include <sodium.h>

#include <stdexcept>

#include "bftkv/bytes.hpp"

namespace bftkv {

Digest sha256(const uint8_t* p, size_t n) {
    Digest d;
    crypto_hash_sha256(d.v.data(), p, n);
    return d;
}

uint64_t digest_mod(const Digest& d, uint64_t m) {
    if (m == 0) throw std::invalid_argument("digest_mod: zero modulus");
    // Horner over bytes: treats the digest as a big-endian integer.
    uint64_t r = 0;
    for (uint8_t b : d.v) r = (r * 256 + b) % m;
    return r;
}

namespace {

void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) throw std::runtime_error("sodium_init failed");
}

Bytes derive_key_material(const char* label, uint64_t run_seed, NodeId id) {
    ByteWriter w;
    w.blob(std::string_view(label));
    w.u64(run_seed);
    w.u64(id);
    Digest d = sha256(w.bytes());
    return Bytes(d.v.begin(), d.v.end());
}

}  // namespace

KeyStore::KeyStore(SigScheme scheme, uint64_t run_seed) : scheme_(scheme), run_seed_(run_seed) {
    ensure_sodium();
}

void KeyStore::register_identity(NodeId id) {
    if (keys_.count(id)) return;
    KeyPair kp;
    if (scheme_ == SigScheme::Mock) {
        kp.secret = derive_key_material("mock-key", run_seed_, id);
        kp.pub = kp.secret;
    } else {
        Bytes seed = derive_key_material("ed25519-seed", run_seed_, id);
        kp.pub.resize(crypto_sign_PUBLICKEYBYTES);
        kp.secret.resize(crypto_sign_SECRETKEYBYTES);
        crypto_sign_seed_keypair(kp.pub.data(), kp.secret.data(), seed.data());
    }
    keys_.emplace(id, std::move(kp));
}

Signature KeyStore::sign(NodeId id, const Bytes& msg) const {
    auto it = keys_.find(id);
    if (it == keys_.end()) throw std::invalid_argument("sign: unknown identity");
    sign_calls_++;
    Signature s;
    s.signer = id;
    if (scheme_ == SigScheme::Mock) {
        ByteWriter w;
        w.blob(it->second.secret);
        w.blob(msg);
        Digest d = sha256(w.bytes());
        s.value.assign(d.v.begin(), d.v.end());
    } else {
        s.value.resize(crypto_sign_BYTES);
        crypto_sign_detached(s.value.data(), nullptr, msg.data(), msg.size(),
                             it->second.secret.data());
    }
    return s;
}

bool KeyStore::verify(NodeId id, const Bytes& msg, const Signature& sig) const {
    auto it = keys_.find(id);
    if (it == keys_.end()) return false;  // unknown identity: failure, not a crash
    if (sig.signer != id) return false;
    verify_calls_++;
    if (scheme_ == SigScheme::Mock) {
        ByteWriter w;
        w.blob(it->second.secret);
        w.blob(msg);
        Digest d = sha256(w.bytes());
        return sig.value.size() == d.v.size() &&
               std::equal(d.v.begin(), d.v.end(), sig.value.begin());
    }
    if (sig.value.size() != crypto_sign_BYTES) return false;
    return crypto_sign_verify_detached(sig.value.data(), msg.data(), msg.size(),
                                       it->second.pub.data()) == 0;
}

}  // namespace bftkv
