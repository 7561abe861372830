#include "quarry/auth.hpp"

#include <sodium.h>

#include <stdexcept>
#include <vector>

namespace quarry::auth {

namespace {

void init() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium failed to initialise");
}

std::string hex(const unsigned char* p, std::size_t n) {
  std::string out(2 * n + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), p, n);
  out.pop_back();
  return out;
}

}  // namespace

PasswordCost PasswordCost::interactive() {
  return {crypto_pwhash_OPSLIMIT_INTERACTIVE, crypto_pwhash_MEMLIMIT_INTERACTIVE};
}

PasswordCost PasswordCost::minimum() { return {crypto_pwhash_OPSLIMIT_MIN, crypto_pwhash_MEMLIMIT_MIN}; }

std::string hash_password(const std::string& password, const PasswordCost& cost) {
  init();
  char out[crypto_pwhash_STRBYTES];
  if (crypto_pwhash_str(out, password.data(), password.size(), cost.ops_limit, cost.mem_limit) != 0)
    throw std::runtime_error("password hashing ran out of memory");
  return out;
}

bool verify_password(const std::string& digest, const std::string& password) {
  init();
  return crypto_pwhash_str_verify(digest.c_str(), password.data(), password.size()) == 0;
}

std::string random_hex(std::size_t n) {
  init();
  std::vector<unsigned char> buf(n);
  randombytes_buf(buf.data(), n);
  return hex(buf.data(), n);
}

std::string token_digest(const std::string& token) {
  init();
  unsigned char out[crypto_generichash_BYTES];
  crypto_generichash(out, sizeof out, reinterpret_cast<const unsigned char*>(token.data()), token.size(), nullptr, 0);
  return hex(out, sizeof out);
}

}  // namespace quarry::auth
