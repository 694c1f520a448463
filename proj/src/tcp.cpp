// Copyright 2026 The trilat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "trilat/endpoints.hpp"
#include "trilat/error.hpp"

namespace trilat {
namespace {

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Socket() { reset(); }

  int fd() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }
  void shutdown() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

std::string errno_text() { return std::strerror(errno); }

sockaddr_in resolve(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw Error(Errc::Connection, "cannot resolve " + ep.to_string());
  }
  sockaddr_in addr{};
  std::memcpy(&addr, res->ai_addr, sizeof(addr));
  ::freeaddrinfo(res);
  addr.sin_port = htons(ep.port);
  return addr;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

void send_all(int fd, std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::Connection, "send failed: " + errno_text());
    }
    sent += static_cast<std::size_t>(n);
  }
}

/// Waits until `fd` is readable or `timeout_us` passes. Returns true if readable.
bool wait_readable(int fd, Micros timeout_us) {
  pollfd p{fd, POLLIN, 0};
  const timespec ts{static_cast<time_t>(timeout_us / 1'000'000),
                    static_cast<long>((timeout_us % 1'000'000) * 1000)};
  const int rc = ::ppoll(&p, 1, timeout_us < 0 ? nullptr : &ts, nullptr);
  if (rc < 0 && errno != EINTR) throw Error(Errc::Connection, "poll failed: " + errno_text());
  return rc > 0;
}

/// Splits a byte stream into whole messages.
class MessageBuffer {
 public:
  /// Reads what is available; returns false on orderly EOF or error.
  bool fill(int fd) {
    std::uint8_t chunk[4096];
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) return n < 0 && errno == EINTR;
    buf_.insert(buf_.end(), chunk, chunk + n);
    return true;
  }
  std::optional<Bytes> next() {
    const auto len = framed_length(buf_);
    if (!len || buf_.size() < *len) return std::nullopt;
    Bytes msg(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(*len));
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(*len));
    return msg;
  }

 private:
  Bytes buf_;
};

// Server-side plumbing: readers push events, the collector owns ServerCore.
struct ServerEvent {
  enum class Kind { Message, Disconnect } kind;
  ConnectionId conn;
  Bytes bytes;
  Micros received;
};

class EventQueue {
 public:
  void push(ServerEvent e) {
    {
      std::lock_guard lock(mu_);
      q_.push_back(std::move(e));
    }
    cv_.notify_one();
  }
  /// Pops one event, waiting until `deadline_base` (monotonic µs) at most.
  std::optional<ServerEvent> pop_until(Micros deadline_base) {
    std::unique_lock lock(mu_);
    const auto deadline = std::chrono::steady_clock::time_point(std::chrono::microseconds(deadline_base));
    cv_.wait_until(lock, deadline, [this] { return !q_.empty(); });
    if (q_.empty()) return std::nullopt;
    ServerEvent e = std::move(q_.front());
    q_.pop_front();
    return e;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<ServerEvent> q_;
};

}  // namespace

Micros monotonic_now() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

Micros LocalClock::now() const {
  const Micros base = monotonic_now();
  return base + offset_us + static_cast<Micros>(static_cast<double>(base) * drift_ppm * 1e-6);
}

Micros LocalClock::to_base(Micros local) const {
  return static_cast<Micros>(static_cast<double>(local - offset_us) / (1.0 + drift_ppm * 1e-6));
}

SessionSummary run_server(const ServerConfig& cfg, const RigGeometryd& rig, SessionSink& sink,
                          const Endpoint& listen, const ServerOptions& options) {
  ServerCore core(cfg, rig, sink);

  Socket listener(::socket(AF_INET, SOCK_STREAM, 0));
  if (!listener) throw Error(Errc::Connection, "socket: " + errno_text());
  int one = 1;
  ::setsockopt(listener.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = resolve(listen);
  if (::bind(listener.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listener.fd(), 16) != 0) {
    throw Error(Errc::Connection, "cannot listen on " + listen.to_string() + ": " + errno_text());
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listener.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  if (options.on_listening) options.on_listening(ntohs(addr.sin_port));

  EventQueue events;
  std::atomic<bool> stopping{false};
  std::mutex conns_mu;
  std::map<ConnectionId, std::shared_ptr<Socket>> conns;
  std::vector<std::thread> readers;

  auto reader = [&events](ConnectionId id, std::shared_ptr<Socket> sock) {
    MessageBuffer buf;
    try {
      while (buf.fill(sock->fd())) {
        const Micros received = monotonic_now();
        while (auto msg = buf.next()) {
          events.push({ServerEvent::Kind::Message, id, std::move(*msg), received});
        }
      }
    } catch (const Error&) {
      // corrupt stream: treat as a lost connection
    }
    events.push({ServerEvent::Kind::Disconnect, id, {}, monotonic_now()});
  };

  std::thread acceptor([&] {
    ConnectionId next_id = 1;
    while (!stopping.load()) {
      if (!wait_readable(listener.fd(), 50'000)) continue;
      const int fd = ::accept(listener.fd(), nullptr, nullptr);
      if (fd < 0) continue;
      set_nodelay(fd);
      auto sock = std::make_shared<Socket>(fd);
      const ConnectionId id = next_id++;
      {
        std::lock_guard lock(conns_mu);
        conns[id] = sock;
        readers.emplace_back(reader, id, sock);
      }
    }
  });

  auto deliver = [&](std::vector<Outgoing> out) {
    for (Outgoing& o : out) {
      std::shared_ptr<Socket> sock;
      {
        std::lock_guard lock(conns_mu);
        if (auto it = conns.find(o.conn); it != conns.end()) sock = it->second;
      }
      if (!sock) continue;
      try {
        send_all(sock->fd(), o.bytes);
      } catch (const Error&) {
        sock->shutdown();
      }
      if (o.close_after) sock->shutdown();
    }
  };

  const Micros started_at = monotonic_now();
  std::optional<Micros> finished_at;
  for (;;) {
    const Micros now = monotonic_now();
    core.advance(now);
    if (core.started() && core.all_iterations_closed()) {
      if (!finished_at) finished_at = now;
      if (core.active_clients() == 0 || now - *finished_at >= options.linger_us) break;
    }
    if (!core.started() && now - started_at >= options.start_timeout_us) break;

    Micros wake = now + 50'000;
    if (auto d = core.next_deadline()) wake = std::min(wake, *d);
    if (auto ev = events.pop_until(wake)) {
      const Micros t = monotonic_now();
      if (ev->kind == ServerEvent::Kind::Disconnect) {
        deliver(core.on_disconnect(ev->conn, t));
        std::lock_guard lock(conns_mu);
        conns.erase(ev->conn);
      } else {
        try {
          deliver(core.on_message(ev->conn, ev->bytes, ev->received, t));
        } catch (const Error&) {
          // malformed message: drop the peer
          std::lock_guard lock(conns_mu);
          if (auto it = conns.find(ev->conn); it != conns.end()) it->second->shutdown();
        }
      }
    }
  }

  stopping = true;
  acceptor.join();
  {
    std::lock_guard lock(conns_mu);
    for (auto& [id, sock] : conns) sock->shutdown();
  }
  for (std::thread& t : readers) t.join();
  return core.summary();
}

ClientSummary run_client(const ClientConfig& cfg, MeasurementSource& source,
                         const LocalClock& clock, const Endpoint& server,
                         Micros connect_timeout_us) {
  ClientCore core(cfg, source);
  const sockaddr_in addr = resolve(server);

  Socket sock;
  const Micros give_up = monotonic_now() + connect_timeout_us;
  for (;;) {
    sock = Socket(::socket(AF_INET, SOCK_STREAM, 0));
    if (::connect(sock.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) == 0) break;
    if (monotonic_now() >= give_up) {
      throw Error(Errc::Connection, "client " + std::to_string(cfg.id) + " cannot reach " +
                                        server.to_string() + ": " + errno_text());
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  set_nodelay(sock.fd());

  auto send = [&](const std::vector<Bytes>& out) {
    for (const Bytes& b : out) send_all(sock.fd(), b);
  };
  send(core.start(clock.now()));

  MessageBuffer buf;
  while (!core.finished()) {
    Micros timeout = 200'000;
    if (auto wake = core.next_wakeup()) {
      timeout = std::max<Micros>(0, clock.to_base(*wake) - monotonic_now());
    }
    if (wait_readable(sock.fd(), timeout)) {
      const Micros received = clock.now();
      if (!buf.fill(sock.fd())) {
        throw Error(Errc::Connection, "client " + std::to_string(cfg.id) +
                                          " lost connection to " + server.to_string());
      }
      while (auto msg = buf.next()) send(core.on_message(*msg, received));
    }
    if (auto wake = core.next_wakeup(); wake && clock.now() >= *wake) {
      send(core.on_timer(clock.now()));
    }
  }
  if (core.refused()) {
    throw Error(Errc::DuplicateClientId,
                "server " + server.to_string() + " refused client id " + std::to_string(cfg.id));
  }
  // Let the goodbye drain before closing.
  ::shutdown(sock.fd(), SHUT_WR);
  while (wait_readable(sock.fd(), 500'000) && buf.fill(sock.fd())) {
  }
  return core.summary();
}

}  // namespace trilat
