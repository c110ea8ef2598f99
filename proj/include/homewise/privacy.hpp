#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <openssl/evp.h>
#include <openssl/rand.h>

#include "homewise/error.hpp"

namespace homewise {

using Sha256Digest = std::array<unsigned char, 32>;

inline Sha256Digest sha256(std::string_view data) {
  Sha256Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size())
    throw Error(ErrorCode::Internal, "SHA-256 digest failed");
  return out;
}

inline std::string to_hex(const unsigned char* bytes, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(kDigits[bytes[i] >> 4]);
    out.push_back(kDigits[bytes[i] & 0x0f]);
  }
  return out;
}

inline std::string sha256_hex(std::string_view data) {
  const auto d = sha256(data);
  return to_hex(d.data(), d.size());
}

inline constexpr std::size_t kPseudonymHexChars = 16;

/// SHA-256(salt || id), first 16 hex characters. Throws EmptyId.
inline std::string hash_building_id(std::string_view id, std::string_view salt) {
  if (id.empty()) throw Error(ErrorCode::EmptyId, "building id must not be empty");
  std::string buf;
  buf.reserve(salt.size() + id.size());
  buf.append(salt).append(id);
  return sha256_hex(buf).substr(0, kPseudonymHexChars);
}

/// Per-dataset seed: the first eight bytes (big endian) of
/// SHA-256(decimal seed || ":" || pseudonym).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view pseudonym) {
  const auto d = sha256(std::to_string(seed) + ":" + std::string(pseudonym));
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | d[static_cast<std::size_t>(i)];
  return v;
}

/// Unguessable opaque token: 16 random bytes as hex.
inline std::string random_token() {
  unsigned char bytes[16];
  if (RAND_bytes(bytes, sizeof bytes) != 1) throw Error(ErrorCode::Internal, "random source unavailable");
  return to_hex(bytes, sizeof bytes);
}

}  // namespace homewise
