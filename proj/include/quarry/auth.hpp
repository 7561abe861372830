#pragma once

#include <cstddef>
#include <string>

namespace quarry::auth {

/// Argon2id work factors.
struct PasswordCost {
  unsigned long long ops_limit;
  std::size_t mem_limit;

  static PasswordCost interactive();
  static PasswordCost minimum();
};

std::string hash_password(const std::string& password, const PasswordCost& cost);
bool verify_password(const std::string& digest, const std::string& password);

/// Hex of n random bytes.
std::string random_hex(std::size_t n);
/// Keyless BLAKE2b of a token, hex encoded. Sessions are stored by digest.
std::string token_digest(const std::string& token);

}  // namespace quarry::auth
