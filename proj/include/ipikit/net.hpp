#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "ipikit/http_message.hpp"

namespace ipikit {

/// Blocking byte stream over a socket or a TLS session.
class Stream {
 public:
  virtual ~Stream() = default;
  /// >0 bytes read, 0 on orderly EOF, <0 on error/timeout.
  virtual int read(char* buf, size_t len) = 0;
  virtual int write(const char* buf, size_t len) = 0;

  bool write_all(std::string_view data);
};

class SocketStream final : public Stream {
 public:
  explicit SocketStream(int fd) : fd_(fd) {}
  ~SocketStream() override;
  SocketStream(const SocketStream&) = delete;
  SocketStream& operator=(const SocketStream&) = delete;

  int read(char* buf, size_t len) override;
  int write(const char* buf, size_t len) override;
  int fd() const { return fd_; }
  /// Releases ownership of the descriptor (used when a TLS session takes over).
  int release();

 private:
  int fd_;
};

/// Connects with a timeout; throws Error on failure. The timeout also
/// becomes the socket's read/write timeout.
std::unique_ptr<SocketStream> tcp_connect(const std::string& host, int port, int timeout_ms);

/// Binds and listens; throws Error. Port 0 selects an ephemeral port;
/// *bound_port receives the actual one.
int tcp_listen(const std::string& host, int port, int* bound_port);

void set_socket_timeouts(int fd, int timeout_ms);

/// Line/length-delimited reading over a Stream.
class BufferedReader {
 public:
  explicit BufferedReader(Stream& stream) : stream_(stream) {}

  /// Reads a line up to CRLF or LF (terminator stripped). False on EOF with
  /// no pending bytes; throws Error past a sanity limit.
  bool read_line(std::string& out);
  bool read_exact(std::string& out, size_t len);
  /// Appends whatever arrives next (up to max bytes); 0 on EOF.
  size_t read_some(std::string& out, size_t max);

 private:
  bool fill();
  Stream& stream_;
  std::string buffer_;
  size_t pos_ = 0;
};

// ---- HTTP over streams ------------------------------------------------------

/// Reads request line + headers. nullopt on clean EOF before any byte;
/// throws Error on malformed input.
std::optional<HttpRequest> read_request_head(BufferedReader& reader);

/// Reads the request body per Content-Length or chunked coding.
void read_request_body(BufferedReader& reader, HttpRequest& request);

/// Reads a full response (head + body). Body framing: none for HEAD/1xx/
/// 204/304, otherwise chunked, Content-Length, or read-to-EOF. Bodies
/// larger than max_body refuse to buffer (Error).
std::optional<HttpResponse> read_response(BufferedReader& reader, bool head_request,
                                          uint64_t max_body);

}  // namespace ipikit
