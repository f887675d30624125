#include "ipikit/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "ipikit/util.hpp"

namespace ipikit {

namespace {
constexpr size_t kMaxLineLength = 64 * 1024;
constexpr size_t kMaxHeaderCount = 256;
constexpr uint64_t kHardBodyLimit = 1ULL << 30;
}  // namespace

bool Stream::write_all(std::string_view data) {
  size_t off = 0;
  while (off < data.size()) {
    int n = write(data.data() + off, data.size() - off);
    if (n <= 0) return false;
    off += static_cast<size_t>(n);
  }
  return true;
}

SocketStream::~SocketStream() {
  if (fd_ >= 0) ::close(fd_);
}

int SocketStream::read(char* buf, size_t len) {
  while (true) {
    ssize_t n = ::recv(fd_, buf, len, 0);
    if (n >= 0) return static_cast<int>(n);
    if (errno == EINTR) continue;
    return -1;
  }
}

int SocketStream::write(const char* buf, size_t len) {
  while (true) {
    ssize_t n = ::send(fd_, buf, len, MSG_NOSIGNAL);
    if (n >= 0) return static_cast<int>(n);
    if (errno == EINTR) continue;
    return -1;
  }
}

int SocketStream::release() {
  int fd = fd_;
  fd_ = -1;
  return fd;
}

void set_socket_timeouts(int fd, int timeout_ms) {
  timeval tv{};
  tv.tv_sec = timeout_ms / 1000;
  tv.tv_usec = (timeout_ms % 1000) * 1000;
  setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

std::unique_ptr<SocketStream> tcp_connect(const std::string& host, int port, int timeout_ms) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* results = nullptr;
  std::string service = std::to_string(port);
  int rc = getaddrinfo(host.c_str(), service.c_str(), &hints, &results);
  if (rc != 0) {
    throw Error("cannot resolve " + host + ": " + gai_strerror(rc));
  }

  int fd = -1;
  std::string last_error = "no addresses";
  for (addrinfo* ai = results; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_NONBLOCK, ai->ai_protocol);
    if (fd < 0) continue;
    int conn = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (conn == 0) break;
    if (errno == EINPROGRESS) {
      pollfd pfd{fd, POLLOUT, 0};
      int ready = ::poll(&pfd, 1, timeout_ms);
      int err = 0;
      socklen_t err_len = sizeof(err);
      if (ready > 0 && getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &err_len) == 0 && err == 0) {
        break;
      }
      last_error = ready == 0 ? "connect timeout" : std::strerror(err ? err : errno);
    } else {
      last_error = std::strerror(errno);
    }
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(results);
  if (fd < 0) {
    throw Error("cannot connect to " + host + ":" + service + ": " + last_error);
  }

  int flags = fcntl(fd, F_GETFL, 0);
  fcntl(fd, F_SETFL, flags & ~O_NONBLOCK);
  set_socket_timeouts(fd, timeout_ms);
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return std::make_unique<SocketStream>(fd);
}

int tcp_listen(const std::string& host, int port, int* bound_port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw Error("invalid bind address: " + host);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    std::string err = std::strerror(errno);
    ::close(fd);
    throw Error("cannot bind " + host + ":" + std::to_string(port) + ": " + err);
  }
  if (::listen(fd, 64) != 0) {
    std::string err = std::strerror(errno);
    ::close(fd);
    throw Error("listen failed: " + err);
  }
  if (bound_port != nullptr) {
    sockaddr_in actual{};
    socklen_t len = sizeof(actual);
    getsockname(fd, reinterpret_cast<sockaddr*>(&actual), &len);
    *bound_port = ntohs(actual.sin_port);
  }
  return fd;
}

bool BufferedReader::fill() {
  char buf[16384];
  int n = stream_.read(buf, sizeof(buf));
  if (n <= 0) return false;
  buffer_.append(buf, static_cast<size_t>(n));
  return true;
}

bool BufferedReader::read_line(std::string& out) {
  out.clear();
  while (true) {
    size_t nl = buffer_.find('\n', pos_);
    if (nl != std::string::npos) {
      size_t len = nl - pos_;
      out.assign(buffer_, pos_, len);
      if (!out.empty() && out.back() == '\r') out.pop_back();
      pos_ = nl + 1;
      if (pos_ > (1 << 20)) {
        buffer_.erase(0, pos_);
        pos_ = 0;
      }
      return true;
    }
    if (buffer_.size() - pos_ > kMaxLineLength) throw Error("HTTP line too long");
    if (!fill()) {
      if (pos_ < buffer_.size()) {
        out.assign(buffer_, pos_, buffer_.size() - pos_);
        pos_ = buffer_.size();
        return true;
      }
      return false;
    }
  }
}

bool BufferedReader::read_exact(std::string& out, size_t len) {
  while (buffer_.size() - pos_ < len) {
    if (!fill()) return false;
  }
  out.append(buffer_, pos_, len);
  pos_ += len;
  if (pos_ > (1 << 20)) {
    buffer_.erase(0, pos_);
    pos_ = 0;
  }
  return true;
}

size_t BufferedReader::read_some(std::string& out, size_t max) {
  if (pos_ >= buffer_.size() && !fill()) return 0;
  size_t take = std::min(max, buffer_.size() - pos_);
  out.append(buffer_, pos_, take);
  pos_ += take;
  if (pos_ == buffer_.size()) {
    buffer_.clear();
    pos_ = 0;
  }
  return take;
}

namespace {

void parse_headers(BufferedReader& reader, HeaderMap& headers) {
  std::string line;
  size_t count = 0;
  while (true) {
    if (!reader.read_line(line)) throw Error("unexpected EOF in headers");
    if (line.empty()) return;
    if (++count > kMaxHeaderCount) throw Error("too many headers");
    size_t colon = line.find(':');
    if (colon == std::string::npos) throw Error("malformed header line: " + line);
    std::string name(trim(line.substr(0, colon)));
    std::string value(trim(line.substr(colon + 1)));
    if (name.empty()) throw Error("malformed header line: " + line);
    headers.add(name, value);
  }
}

std::optional<uint64_t> content_length_of(const HeaderMap& headers) {
  auto value = headers.get("Content-Length");
  if (!value) return std::nullopt;
  try {
    return std::stoull(std::string(trim(*value)));
  } catch (...) {
    throw Error("invalid Content-Length: " + *value);
  }
}

bool is_chunked(const HeaderMap& headers) {
  auto te = headers.get("Transfer-Encoding");
  if (!te) return false;
  auto chain = split(*te, ',');
  return !chain.empty() && iequals(trim(chain.back()), "chunked");
}

std::string read_chunked(BufferedReader& reader, uint64_t max_body) {
  std::string body;
  std::string line;
  while (true) {
    if (!reader.read_line(line)) throw Error("unexpected EOF in chunked body");
    std::string size_text(trim(line.substr(0, line.find(';'))));
    uint64_t chunk_size = 0;
    try {
      chunk_size = std::stoull(size_text, nullptr, 16);
    } catch (...) {
      throw Error("malformed chunk size: " + line);
    }
    if (chunk_size == 0) break;
    if (body.size() + chunk_size > max_body) throw Error("response body exceeds buffer limit");
    if (!reader.read_exact(body, chunk_size)) throw Error("unexpected EOF in chunk");
    if (!reader.read_line(line) || !line.empty()) throw Error("missing chunk terminator");
  }
  // trailers
  while (reader.read_line(line) && !line.empty()) {
  }
  return body;
}

}  // namespace

std::optional<HttpRequest> read_request_head(BufferedReader& reader) {
  std::string line;
  if (!reader.read_line(line)) return std::nullopt;
  if (line.empty() && !reader.read_line(line)) return std::nullopt;  // tolerate stray CRLF
  if (line.empty()) return std::nullopt;

  HttpRequest request;
  auto parts = split(line, ' ');
  if (parts.size() != 3) throw Error("malformed request line: " + line);
  request.method = parts[0];
  request.target = parts[1];
  request.version = parts[2];
  parse_headers(reader, request.headers);
  return request;
}

void read_request_body(BufferedReader& reader, HttpRequest& request) {
  if (is_chunked(request.headers)) {
    request.body = read_chunked(reader, kHardBodyLimit);
    return;
  }
  auto length = content_length_of(request.headers);
  if (!length || *length == 0) return;
  if (*length > kHardBodyLimit) throw Error("request body exceeds buffer limit");
  if (!reader.read_exact(request.body, *length)) throw Error("unexpected EOF in request body");
}

std::optional<HttpResponse> read_response(BufferedReader& reader, bool head_request,
                                          uint64_t max_body) {
  std::string line;
  if (!reader.read_line(line)) return std::nullopt;
  if (line.empty()) return std::nullopt;

  HttpResponse response;
  size_t sp1 = line.find(' ');
  if (sp1 == std::string::npos || line.compare(0, 5, "HTTP/") != 0) {
    throw Error("malformed status line: " + line);
  }
  size_t sp2 = line.find(' ', sp1 + 1);
  response.version = line.substr(0, sp1);
  std::string code = sp2 == std::string::npos ? line.substr(sp1 + 1)
                                              : line.substr(sp1 + 1, sp2 - sp1 - 1);
  try {
    response.status = std::stoi(code);
  } catch (...) {
    throw Error("malformed status code: " + line);
  }
  response.reason = sp2 == std::string::npos ? "" : line.substr(sp2 + 1);
  parse_headers(reader, response.headers);

  bool bodyless = head_request || response.status / 100 == 1 || response.status == 204 ||
                  response.status == 304;
  if (bodyless) return response;

  if (is_chunked(response.headers)) {
    response.body = read_chunked(reader, max_body);
    return response;
  }
  if (auto length = content_length_of(response.headers)) {
    if (*length > max_body) throw Error("response body exceeds buffer limit");
    if (!reader.read_exact(response.body, *length)) {
      throw Error("unexpected EOF in response body");
    }
    return response;
  }
  // No framing: body runs to EOF.
  while (true) {
    size_t n = reader.read_some(response.body, 1 << 20);
    if (n == 0) break;
    if (response.body.size() > max_body) throw Error("response body exceeds buffer limit");
  }
  return response;
}

}  // namespace ipikit
