#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "eeg/error.hpp"
#include "eeg/guard.hpp"
#include "eeg/prototype.hpp"
#include "eeg/wire.hpp"

namespace eeg {

namespace net {

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept {
    if (this != &other) {
      close();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// Accepts "host:port", ":port" or "port".
inline Endpoint parse_endpoint(const std::string& text) {
  Endpoint ep;
  std::string port_text = text;
  if (const auto colon = text.rfind(':'); colon != std::string::npos) {
    if (colon > 0) ep.host = text.substr(0, colon);
    port_text = text.substr(colon + 1);
  }
  try {
    std::size_t used = 0;
    const long port = std::stol(port_text, &used);
    if (used != port_text.size() || port < 0 || port > 65535) throw std::out_of_range("port");
    ep.port = static_cast<std::uint16_t>(port);
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, "bad endpoint '" + text + "', expected host:port");
  }
  return ep;
}

inline sockaddr_in resolve(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &found) != 0 || !found) {
    throw Error(ErrorKind::Io, "cannot resolve host '" + ep.host + "'");
  }
  sockaddr_in addr{};
  std::memcpy(&addr, found->ai_addr, sizeof(addr));
  ::freeaddrinfo(found);
  addr.sin_port = htons(ep.port);
  return addr;
}

inline bool write_all(int fd, const std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

/// Reads exactly `size` bytes. Returns false on EOF or error.
inline bool read_all(int fd, std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t n = ::recv(fd, data, size, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

inline bool write_frame(int fd, std::span<const std::uint8_t> payload) {
  const auto framed = wire::frame(payload);
  return write_all(fd, framed.data(), framed.size());
}

enum class FrameStatus { Ok, Closed, TooLarge };

inline FrameStatus read_frame(int fd, wire::Bytes& payload) {
  std::uint8_t header[4];
  if (!read_all(fd, header, 4)) return FrameStatus::Closed;
  const std::uint32_t size = static_cast<std::uint32_t>(header[0]) |
                             (static_cast<std::uint32_t>(header[1]) << 8) |
                             (static_cast<std::uint32_t>(header[2]) << 16) |
                             (static_cast<std::uint32_t>(header[3]) << 24);
  if (size > wire::kMaxFrameBytes) return FrameStatus::TooLarge;
  payload.resize(size);
  if (size > 0 && !read_all(fd, payload.data(), size)) return FrameStatus::Closed;
  return FrameStatus::Ok;
}

}  // namespace net

/// Length-prefixed TCP sidecar around score_prompt. Each connection gets
/// its own detached thread; requests on one connection are answered in order.
/// The prototype/config snapshot is immutable and can be swapped whole
/// with reload().
class GuardServer {
 public:
  GuardServer(PrototypeSet proto, GuardConfig config, ScoreOptions options = {}) {
    reload(std::move(proto), std::move(config), options);
  }

  GuardServer(const GuardServer&) = delete;
  GuardServer& operator=(const GuardServer&) = delete;
  ~GuardServer() { stop(); }

  void reload(PrototypeSet proto, GuardConfig config, ScoreOptions options = {}) {
    auto check = validate_prototypes(proto);
    if (!check.ok()) throw Error(ErrorKind::InvalidArgument, check.violations.front().message);
    validate_config(config, proto);
    auto next = std::make_shared<const Snapshot>(Snapshot{std::move(proto), std::move(config), options});
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(next);
  }

  /// Binds and listens; returns the bound port (useful with port 0).
  std::uint16_t listen(const std::string& endpoint) {
    const net::Endpoint ep = net::parse_endpoint(endpoint);
    const sockaddr_in addr = net::resolve(ep);
    net::Socket sock(::socket(AF_INET, SOCK_STREAM, 0));
    if (!sock.valid()) throw Error(ErrorKind::Io, std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(sock.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(sock.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
      throw Error(ErrorKind::Io, "bind " + endpoint + ": " + std::strerror(errno));
    }
    if (::listen(sock.fd(), 64) != 0) {
      throw Error(ErrorKind::Io, std::string("listen: ") + std::strerror(errno));
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(sock.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
    listener_ = std::move(sock);
    port_ = ntohs(bound.sin_port);
    return port_;
  }

  std::uint16_t port() const { return port_; }

  /// Accept loop; returns after stop().
  void serve() {
    if (!listener_.valid()) throw Error(ErrorKind::InvalidArgument, "serve() before listen()");
    running_ = true;
    accept_loop();
  }

  /// Runs the accept loop on a background thread.
  void start() {
    if (!listener_.valid()) throw Error(ErrorKind::InvalidArgument, "start() before listen()");
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
  }

  void stop() {
    running_ = false;
    if (acceptor_.joinable()) acceptor_.join();
    std::unique_lock lock(sessions_mutex_);
    for (int fd : session_fds_) ::shutdown(fd, SHUT_RDWR);
    sessions_done_.wait(lock, [this] { return session_fds_.empty(); });
    lock.unlock();
    listener_.close();
  }

 private:
  struct Snapshot {
    PrototypeSet proto;
    GuardConfig config;
    ScoreOptions options;
  };

  void accept_loop() {
    while (running_) {
      pollfd pfd{listener_.fd(), POLLIN, 0};
      const int ready = ::poll(&pfd, 1, 100);
      if (ready <= 0 || !(pfd.revents & POLLIN)) continue;
      const int fd = ::accept(listener_.fd(), nullptr, nullptr);
      if (fd < 0) continue;
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      std::lock_guard lock(sessions_mutex_);
      if (!running_) {
        ::close(fd);
        break;
      }
      session_fds_.push_back(fd);
      std::thread([this, fd] { run_session(fd); }).detach();
    }
  }

  std::shared_ptr<const Snapshot> snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
  }

  void run_session(int fd) {
    wire::Bytes payload;
    while (true) {
      const auto status = net::read_frame(fd, payload);
      if (status == net::FrameStatus::Closed) break;
      if (status == net::FrameStatus::TooLarge) {
        // The oversized payload cannot be skipped safely; answer and hang up.
        const auto reply = wire::encode_error(wire::ErrorCode::Malformed, "frame too large");
        net::write_frame(fd, reply);
        break;
      }
      const auto snap = snapshot();
      const auto reply = wire::handle_request(payload, snap->proto, snap->config, snap->options);
      if (!net::write_frame(fd, reply)) break;
    }
    std::lock_guard lock(sessions_mutex_);
    std::erase(session_fds_, fd);
    ::close(fd);
    sessions_done_.notify_all();
  }

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
  net::Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex sessions_mutex_;
  std::condition_variable sessions_done_;
  std::vector<int> session_fds_;
};

/// Blocking client for the guard protocol.
class GuardClient {
 public:
  GuardClient(const std::string& host, std::uint16_t port) {
    const sockaddr_in addr = net::resolve({host, port});
    sock_ = net::Socket(::socket(AF_INET, SOCK_STREAM, 0));
    if (!sock_.valid()) throw Error(ErrorKind::Io, std::string("socket: ") + std::strerror(errno));
    if (::connect(sock_.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
      throw Error(ErrorKind::Io, "connect: " + std::string(std::strerror(errno)));
    }
    const int one = 1;
    ::setsockopt(sock_.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }

  /// Sends one payload (framed) and returns the reply payload.
  wire::Bytes round_trip(std::span<const std::uint8_t> payload) {
    send_raw(wire::frame(payload));
    return receive();
  }

  void send_raw(std::span<const std::uint8_t> bytes) {
    if (!net::write_all(sock_.fd(), bytes.data(), bytes.size())) {
      throw Error(ErrorKind::Io, "send failed");
    }
  }

  wire::Bytes receive() {
    wire::Bytes reply;
    if (net::read_frame(sock_.fd(), reply) != net::FrameStatus::Ok) {
      throw Error(ErrorKind::Io, "connection closed before reply");
    }
    return reply;
  }

  wire::Response score(const EmbeddingTrace& trace) {
    return wire::decode_response(round_trip(wire::encode_request(trace)));
  }

 private:
  net::Socket sock_;
};

/// Listens on `endpoint` and serves until the process is stopped.
inline void serve_guard(const std::string& endpoint, PrototypeSet proto, GuardConfig config,
                        ScoreOptions options = {}) {
  GuardServer server(std::move(proto), std::move(config), options);
  server.listen(endpoint);
  server.serve();
}

}  // namespace eeg
