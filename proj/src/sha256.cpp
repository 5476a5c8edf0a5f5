#include "aberrasim/io/sha256.hpp"

#include <array>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

#include <openssl/evp.h>

#include "aberrasim/io/io_error.hpp"

namespace aberrasim {

namespace {

using CtxPtr =
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

std::string finish_hex(EVP_MD_CTX* ctx) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, digest.data(), &len) != 1)
    throw IoError("sha256: digest finalization failed");
  static const char* hex = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned int i = 0; i < len; ++i) {
    out[2 * i] = hex[digest[i] >> 4];
    out[2 * i + 1] = hex[digest[i] & 0xf];
  }
  return out;
}

CtxPtr make_ctx() {
  CtxPtr ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw IoError("sha256: context initialization failed");
  return ctx;
}

}  // namespace

std::string sha256_hex(const void* data, std::size_t size) {
  CtxPtr ctx = make_ctx();
  if (EVP_DigestUpdate(ctx.get(), data, size) != 1)
    throw IoError("sha256: digest update failed");
  return finish_hex(ctx.get());
}

std::string sha256_hex(const std::string& bytes) {
  return sha256_hex(bytes.data(), bytes.size());
}

std::string sha256_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("sha256: cannot open " + path);
  CtxPtr ctx = make_ctx();
  std::vector<char> buf(1 << 20);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const std::streamsize got = in.gcount();
    if (got > 0 &&
        EVP_DigestUpdate(ctx.get(), buf.data(),
                         static_cast<std::size_t>(got)) != 1)
      throw IoError("sha256: digest update failed");
  }
  if (in.bad()) throw IoError("sha256: read error on " + path);
  return finish_hex(ctx.get());
}

}  // namespace aberrasim
