#pragma once

#include <memory>
#include <string>

#include "ipikit/net.hpp"

typedef struct ssl_st SSL;
typedef struct ssl_ctx_st SSL_CTX;

namespace ipikit {

/// Stream over an established TLS session; owns the SSL object, its context,
/// and the underlying descriptor.
class TlsStream final : public Stream {
 public:
  TlsStream(SSL* ssl, SSL_CTX* ctx, int fd);
  ~TlsStream() override;
  TlsStream(const TlsStream&) = delete;
  TlsStream& operator=(const TlsStream&) = delete;

  int read(char* buf, size_t len) override;
  int write(const char* buf, size_t len) override;

 private:
  SSL* ssl_;
  SSL_CTX* ctx_;
  int fd_;
};

/// Server-side handshake on an accepted socket using the given PEM pair.
/// Takes ownership of the descriptor; throws Error on handshake failure.
std::unique_ptr<TlsStream> tls_server_handshake(int fd, const std::string& cert_pem,
                                                const std::string& key_pem);

/// TCP connect + TLS handshake. When `verify` is set, `ca_path` supplies the
/// trust anchor and the peer must present a matching host certificate.
std::unique_ptr<TlsStream> tls_client_connect(const std::string& host, int port, int timeout_ms,
                                              bool verify, const std::string& ca_path = {});

}  // namespace ipikit
