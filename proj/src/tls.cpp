#include "ipikit/tls.hpp"

#include <openssl/err.h>
#include <openssl/pem.h>
#include <openssl/ssl.h>
#include <openssl/x509v3.h>

#include <unistd.h>

#include "ipikit/util.hpp"

namespace ipikit {

namespace {

[[noreturn]] void tls_fail(const std::string& what) {
  char buf[256] = {0};
  ERR_error_string_n(ERR_get_error(), buf, sizeof(buf));
  throw Error(what + ": " + buf);
}

struct BioDeleter {
  void operator()(BIO* p) const { BIO_free(p); }
};

X509* cert_from_pem(const std::string& pem) {
  std::unique_ptr<BIO, BioDeleter> bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
  return PEM_read_bio_X509(bio.get(), nullptr, nullptr, nullptr);
}

EVP_PKEY* key_from_pem(const std::string& pem) {
  std::unique_ptr<BIO, BioDeleter> bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())));
  return PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr);
}

}  // namespace

TlsStream::TlsStream(SSL* ssl, SSL_CTX* ctx, int fd) : ssl_(ssl), ctx_(ctx), fd_(fd) {}

TlsStream::~TlsStream() {
  if (ssl_ != nullptr) {
    SSL_shutdown(ssl_);
    SSL_free(ssl_);
  }
  if (ctx_ != nullptr) SSL_CTX_free(ctx_);
  if (fd_ >= 0) ::close(fd_);
}

int TlsStream::read(char* buf, size_t len) {
  int n = SSL_read(ssl_, buf, static_cast<int>(len));
  if (n > 0) return n;
  int err = SSL_get_error(ssl_, n);
  if (err == SSL_ERROR_ZERO_RETURN) return 0;
  return -1;
}

int TlsStream::write(const char* buf, size_t len) {
  int n = SSL_write(ssl_, buf, static_cast<int>(len));
  return n > 0 ? n : -1;
}

std::unique_ptr<TlsStream> tls_server_handshake(int fd, const std::string& cert_pem,
                                                const std::string& key_pem) {
  SSL_CTX* ctx = SSL_CTX_new(TLS_server_method());
  if (ctx == nullptr) tls_fail("SSL_CTX_new");

  X509* cert = cert_from_pem(cert_pem);
  EVP_PKEY* key = key_from_pem(key_pem);
  bool loaded = cert != nullptr && key != nullptr &&
                SSL_CTX_use_certificate(ctx, cert) == 1 &&
                SSL_CTX_use_PrivateKey(ctx, key) == 1;
  if (cert != nullptr) X509_free(cert);
  if (key != nullptr) EVP_PKEY_free(key);
  if (!loaded) {
    SSL_CTX_free(ctx);
    tls_fail("loading leaf certificate");
  }

  SSL* ssl = SSL_new(ctx);
  SSL_set_fd(ssl, fd);
  if (SSL_accept(ssl) != 1) {
    SSL_free(ssl);
    SSL_CTX_free(ctx);
    ::close(fd);
    tls_fail("TLS handshake (server)");
  }
  return std::make_unique<TlsStream>(ssl, ctx, fd);
}

std::unique_ptr<TlsStream> tls_client_connect(const std::string& host, int port, int timeout_ms,
                                              bool verify, const std::string& ca_path) {
  auto tcp = tcp_connect(host, port, timeout_ms);

  SSL_CTX* ctx = SSL_CTX_new(TLS_client_method());
  if (ctx == nullptr) tls_fail("SSL_CTX_new");
  if (verify) {
    if (ca_path.empty()) {
      SSL_CTX_set_default_verify_paths(ctx);
    } else if (SSL_CTX_load_verify_locations(ctx, ca_path.c_str(), nullptr) != 1) {
      SSL_CTX_free(ctx);
      tls_fail("loading CA bundle " + ca_path);
    }
    SSL_CTX_set_verify(ctx, SSL_VERIFY_PEER, nullptr);
  }

  SSL* ssl = SSL_new(ctx);
  SSL_set_tlsext_host_name(ssl, host.c_str());
  if (verify) {
    SSL_set1_host(ssl, host.c_str());
  }
  int fd = tcp->release();
  SSL_set_fd(ssl, fd);
  if (SSL_connect(ssl) != 1) {
    SSL_free(ssl);
    SSL_CTX_free(ctx);
    ::close(fd);
    tls_fail("TLS handshake with " + host);
  }
  return std::make_unique<TlsStream>(ssl, ctx, fd);
}

}  // namespace ipikit
