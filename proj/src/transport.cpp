#include "mavkit/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "mavkit/errors.hpp"

namespace mavkit {

void LinkStats::update(uint8_t seq) {
  if (last_seq) {
    const uint8_t gap = uint8_t(seq - *last_seq - 1);
    if (gap < 128) lost += gap;
  }
  ++received;
  last_seq = seq;
}

namespace {

[[noreturn]] void fail_errno(const std::string& what) {
  throw LinkError(what + ": " + std::strerror(errno));
}

sockaddr_in parse_endpoint(const std::string& spec) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos)
    throw LinkError("endpoint '" + spec + "' must be host:port or :port");
  const std::string host = spec.substr(0, colon);
  const std::string port_str = spec.substr(colon + 1);
  uint16_t port = 0;
  const auto [p, ec] =
      std::from_chars(port_str.data(), port_str.data() + port_str.size(), port);
  if (ec != std::errc{} || p != port_str.data() + port_str.size())
    throw LinkError("bad port in '" + spec + "'");

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host.empty() || host == "*") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
  } else if (host == "localhost") {
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  } else if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw LinkError("cannot resolve host '" + host + "' (IPv4 literals only)");
  }
  return addr;
}

void set_nonblocking(int fd) {
  const int flags = fcntl(fd, F_GETFL, 0);
  if (flags < 0 || fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0)
    fail_errno("fcntl O_NONBLOCK");
}

class FdGuard {
 public:
  explicit FdGuard(int fd = -1) : fd_(fd) {}
  ~FdGuard() { reset(); }
  FdGuard(const FdGuard&) = delete;
  FdGuard& operator=(const FdGuard&) = delete;

  void reset(int fd = -1) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
  }
  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }

 private:
  int fd_;
};

class UdpLink : public Link {
 public:
  UdpLink(const std::string& local, const std::string& remote) {
    fd_.reset(::socket(AF_INET, SOCK_DGRAM, 0));
    if (!fd_) fail_errno("socket");
    const int one = 1;
    ::setsockopt(fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    const sockaddr_in bind_addr =
        local.empty() ? parse_endpoint(":0") : parse_endpoint(local);
    if (::bind(fd_.get(), reinterpret_cast<const sockaddr*>(&bind_addr),
               sizeof bind_addr) < 0)
      fail_errno("bind " + (local.empty() ? std::string(":0") : local));
    if (!remote.empty()) {
      peer_ = parse_endpoint(remote);
      have_peer_ = true;
      learn_ = false;
    }
    set_nonblocking(fd_.get());
  }

  void send(std::span<const uint8_t> bytes) override {
    if (!fd_) throw LinkError("send on closed link");
    // In learn mode nothing has announced itself yet; drop like a vehicle
    // whose telemetry port has no ground station listening.
    if (!have_peer_) return;
    if (::sendto(fd_.get(), bytes.data(), bytes.size(), 0,
                 reinterpret_cast<const sockaddr*>(&peer_), sizeof peer_) < 0)
      fail_errno("sendto");
  }

  std::vector<Bytes> recv() override {
    if (!fd_) throw LinkError("recv on closed link");
    std::vector<Bytes> out;
    uint8_t buf[2048];
    for (;;) {
      sockaddr_in from{};
      socklen_t from_len = sizeof from;
      const ssize_t n =
          ::recvfrom(fd_.get(), buf, sizeof buf, 0,
                     reinterpret_cast<sockaddr*>(&from), &from_len);
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK) break;
        fail_errno("recvfrom");
      }
      // Learn (or follow) the peer from inbound traffic when no fixed
      // remote was given, so a reconnecting station takes over the stream.
      if (learn_) {
        peer_ = from;
        have_peer_ = true;
      }
      out.emplace_back(buf, buf + n);
    }
    return out;
  }

 private:
  FdGuard fd_;
  sockaddr_in peer_{};
  bool have_peer_ = false;
  bool learn_ = true;
};

class TcpLink : public Link {
 public:
  TcpLink(const std::string& endpoint, bool connect) {
    if (connect) {
      fd_.reset(::socket(AF_INET, SOCK_STREAM, 0));
      if (!fd_) fail_errno("socket");
      const sockaddr_in addr = parse_endpoint(endpoint);
      if (::connect(fd_.get(), reinterpret_cast<const sockaddr*>(&addr),
                    sizeof addr) < 0)
        fail_errno("connect " + endpoint);
      set_nonblocking(fd_.get());
    } else {
      listen_fd_.reset(::socket(AF_INET, SOCK_STREAM, 0));
      if (!listen_fd_) fail_errno("socket");
      const int one = 1;
      ::setsockopt(listen_fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one,
                   sizeof one);
      const sockaddr_in addr = parse_endpoint(endpoint);
      if (::bind(listen_fd_.get(), reinterpret_cast<const sockaddr*>(&addr),
                 sizeof addr) < 0)
        fail_errno("bind " + endpoint);
      if (::listen(listen_fd_.get(), 1) < 0) fail_errno("listen");
      set_nonblocking(listen_fd_.get());
    }
  }

  void send(std::span<const uint8_t> bytes) override {
    accept_if_pending();
    // Still listening with nobody connected: drop, same as the UDP link
    // before it has learned a peer.
    if (!fd_ && listen_fd_) return;
    if (!fd_) throw LinkError("tcp send with no connected peer");
    std::size_t off = 0;
    while (off < bytes.size()) {
      const ssize_t n =
          ::send(fd_.get(), bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK) continue;
        fail_errno("send");
      }
      off += std::size_t(n);
    }
  }

  std::vector<Bytes> recv() override {
    accept_if_pending();
    if (!fd_) return {};
    std::vector<Bytes> out;
    uint8_t buf[4096];
    for (;;) {
      const ssize_t n = ::recv(fd_.get(), buf, sizeof buf, 0);
      if (n == 0) {  // orderly shutdown by the peer
        fd_.reset();
        break;
      }
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK) break;
        fail_errno("recv");
      }
      out.emplace_back(buf, buf + n);
    }
    return out;
  }

 private:
  void accept_if_pending() {
    if (fd_ || !listen_fd_) return;
    const int client = ::accept(listen_fd_.get(), nullptr, nullptr);
    if (client < 0) {
      if (errno == EAGAIN || errno == EWOULDBLOCK) return;
      fail_errno("accept");
    }
    fd_.reset(client);
    set_nonblocking(fd_.get());
  }

  FdGuard listen_fd_;
  FdGuard fd_;
};

}  // namespace

std::unique_ptr<Link> open_udp(const std::string& local,
                               const std::string& remote) {
  return std::make_unique<UdpLink>(local, remote);
}

std::unique_ptr<Link> open_tcp(const std::string& endpoint, bool connect) {
  return std::make_unique<TcpLink>(endpoint, connect);
}

SimLink::SimLink(SimLinkConfig cfg) : cfg_(cfg), rng_(cfg.rng_seed) {
  if (cfg_.drop_probability < 0 || cfg_.drop_probability > 1 ||
      cfg_.corrupt_probability < 0 || cfg_.corrupt_probability > 1)
    throw LinkError("sim link probabilities must lie in [0,1]");
  for (int s = 0; s < 2; ++s) {
    ends_[s].owner_ = this;
    ends_[s].side_ = s;
  }
}

void SimLink::Endpoint::send(std::span<const uint8_t> bytes) {
  owner_->enqueue(side_, bytes);
}

std::vector<Bytes> SimLink::Endpoint::recv() {
  auto& box = owner_->inbox_[side_];
  std::vector<Bytes> out(box.begin(), box.end());
  box.clear();
  return out;
}

void SimLink::enqueue(int from_side, std::span<const uint8_t> bytes) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  if (uniform(rng_) < cfg_.drop_probability) {
    ++dropped_;
    return;
  }
  Bytes copy(bytes.begin(), bytes.end());
  if (!copy.empty() && uniform(rng_) < cfg_.corrupt_probability) {
    std::uniform_int_distribution<std::size_t> pick(0, copy.size() * 8 - 1);
    const std::size_t bit = pick(rng_);
    copy[bit / 8] ^= uint8_t(1u << (bit % 8));
  }
  pending_[1 - from_side].push_back({now_us_ + cfg_.delay_us, std::move(copy)});
}

void SimLink::advance(uint64_t now_us) {
  now_us_ = now_us;
  for (int side = 0; side < 2; ++side) {
    auto& queue = pending_[side];
    std::size_t delivered = 0;
    while (!queue.empty() && queue.front().due_us <= now_us_) {
      Pending p = std::move(queue.front());
      queue.pop_front();
      if (cfg_.capacity_per_advance != 0 &&
          delivered >= cfg_.capacity_per_advance) {
        ++congestion_dropped_;
        continue;
      }
      inbox_[side].push_back(std::move(p.bytes));
      ++delivered;
    }
  }
}

}  // namespace mavkit
