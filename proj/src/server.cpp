// Copyright 2026 The chunkrt Authors
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

#include "chunkrt/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <cstring>
#include <map>
#include <optional>

#include "chunkrt/errors.hpp"
#include "socket_util.hpp"

namespace chunkrt {

namespace net {

bool read_exact(int fd, char* buf, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, buf + got, n - got, 0);
    if (r == 0) {
      if (got == 0) return false;
      throw ConnectionLost("peer closed mid-record");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw Timeout("socket read timed out");
      throw ConnectionLost(std::string("recv: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

void write_all(int fd, const char* data, std::size_t n) {
  std::size_t sent = 0;
  while (sent < n) {
    const ssize_t r = ::send(fd, data + sent, n - sent, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ConnectionLost(std::string("send: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(r);
  }
}

std::optional<std::string> read_frame_payload(int fd) {
  char prefix[4];
  if (!read_exact(fd, prefix, 4)) return std::nullopt;
  const auto b = [&](int i) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(prefix[i]));
  };
  const std::uint32_t len = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
  if (len > kMaxFrameBytes) {
    throw FrameTooLarge("incoming frame declares " + std::to_string(len) + " bytes");
  }
  std::string payload(len, '\0');
  if (len > 0 && !read_exact(fd, payload.data(), len)) {
    throw ConnectionLost("peer closed mid-frame");
  }
  return payload;
}

void write_message(int fd, const WireMessage& msg) {
  const std::string frame = encode_message(msg);
  write_all(fd, frame.data(), frame.size());
}

int connect_tcp(const std::string& host, int port, int timeout_ms) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw ConnectionLost("cannot create socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw ConnectionLost("bad address: " + host);
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw ConnectionLost("cannot connect to " + host + ":" + std::to_string(port));
  }
  set_recv_timeout(fd, timeout_ms);
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return fd;
}

void set_recv_timeout(int fd, int timeout_ms) {
  timeval tv{};
  tv.tv_sec = timeout_ms / 1000;
  tv.tv_usec = (timeout_ms % 1000) * 1000;
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

}  // namespace net

// Reader/worker pair for one accepted connection.
struct InferenceServer::ConnectionThreads {
  int fd = -1;
  std::thread reader;
  std::thread worker;
  std::mutex mu;
  std::condition_variable cv;
  std::optional<ObservationRequest> pending;  // newest wins
  bool closing = false;
  std::mutex write_mu;

  ~ConnectionThreads() {
    if (reader.joinable()) reader.join();
    if (worker.joinable()) worker.join();
    if (fd >= 0) ::close(fd);
  }
};

InferenceServer::InferenceServer(InferenceEngine engine, std::string host, int port)
    : engine_(std::move(engine)), host_(std::move(host)), port_(port) {}

InferenceServer::~InferenceServer() { stop(); }

void InferenceServer::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw ConnectionLost("cannot create listening socket");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port_));
  if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1) {
    throw ConnectionLost("bad bind address: " + host_);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw ConnectionLost("cannot bind " + host_ + ":" + std::to_string(port_));
  }
  if (::listen(listen_fd_, 8) != 0) throw ConnectionLost("listen failed");
  if (port_ == 0) {
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
  }
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void InferenceServer::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (!running_) break;
      continue;
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

    auto conn = std::make_shared<ConnectionThreads>();
    conn->fd = fd;
    // Threads reference the connection through a raw pointer; the vector
    // below owns it and ~ConnectionThreads joins both threads.
    ConnectionThreads* c = conn.get();

    conn->worker = std::thread([this, conn = c] {
      std::map<std::uint64_t, SessionState> sessions;
      for (;;) {
        ObservationRequest req;
        {
          std::unique_lock<std::mutex> lock(conn->mu);
          conn->cv.wait(lock, [&] { return conn->pending.has_value() || conn->closing; });
          if (conn->closing && !conn->pending.has_value()) return;
          req = std::move(*conn->pending);
          conn->pending.reset();
        }
        const int delay = inject_delay_ms_.load();
        if (delay > 0) {
          std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        WireMessage reply;
        try {
          reply = engine_.infer(sessions[req.session], req);
        } catch (const Error& e) {
          reply = ErrorMessage{3, e.what()};
        }
        try {
          std::lock_guard<std::mutex> lock(conn->write_mu);
          net::write_message(conn->fd, reply);
        } catch (const Error&) {
          return;  // connection gone; reader will wind down too
        }
      }
    });

    conn->reader = std::thread([this, conn = c] {
      for (;;) {
        std::optional<std::string> payload;
        try {
          payload = net::read_frame_payload(conn->fd);
        } catch (const FrameTooLarge& e) {
          std::lock_guard<std::mutex> lock(conn->write_mu);
          try {
            net::write_message(conn->fd, ErrorMessage{4, e.what()});
          } catch (const Error&) {
          }
          break;  // framing is unrecoverable
        } catch (const Error&) {
          break;
        }
        if (!payload) break;

        WireMessage msg;
        try {
          msg = decode_payload(*payload);
        } catch (const Error& e) {
          std::lock_guard<std::mutex> lock(conn->write_mu);
          try {
            net::write_message(conn->fd, ErrorMessage{1, e.what()});
          } catch (const Error&) {
            break;
          }
          continue;
        }

        if (const auto* obs = std::get_if<ObservationRequest>(&msg)) {
          std::lock_guard<std::mutex> lock(conn->mu);
          conn->pending = *obs;  // supersedes any queued request
          conn->cv.notify_one();
        } else if (const auto* ctl = std::get_if<Control>(&msg)) {
          if (ctl->kind == ControlKind::kPing) {
            std::lock_guard<std::mutex> lock(conn->write_mu);
            try {
              net::write_message(conn->fd, Control{ControlKind::kPong});
            } catch (const Error&) {
              break;
            }
          } else if (ctl->kind == ControlKind::kStop) {
            break;
          }
          // start/pause are accepted silently
        } else {
          std::lock_guard<std::mutex> lock(conn->write_mu);
          try {
            net::write_message(conn->fd, ErrorMessage{2, "unexpected message"});
          } catch (const Error&) {
            break;
          }
        }
      }
      {
        std::lock_guard<std::mutex> lock(conn->mu);
        conn->closing = true;
        conn->cv.notify_one();
      }
      ::shutdown(conn->fd, SHUT_RDWR);
    });

    {
      std::lock_guard<std::mutex> lock(connections_mu_);
      if (running_) {
        connections_.push_back(std::move(conn));
      } else {
        ::shutdown(c->fd, SHUT_RDWR);
        std::lock_guard<std::mutex> close_lock(c->mu);
        c->closing = true;
        c->cv.notify_one();
      }
    }
    // Dropping `conn` outside the vector joins the threads via the
    // destructor once they wind down.
  }
}

void InferenceServer::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::shared_ptr<ConnectionThreads>> conns;
  {
    std::lock_guard<std::mutex> lock(connections_mu_);
    conns.swap(connections_);
  }
  for (auto& conn : conns) {
    ::shutdown(conn->fd, SHUT_RDWR);
    {
      std::lock_guard<std::mutex> lock(conn->mu);
      conn->closing = true;
      conn->cv.notify_one();
    }
    conn.reset();  // joins reader + worker
  }
}

void InferenceServer::wait() {
  while (running_) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
}

}  // namespace chunkrt
