// Copyright 2026 The MPSI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mpsi/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <thread>

namespace mpsi {
namespace {

bool KnownType(uint8_t t) { return t >= 1 && t <= 7; }

// One direction of an in-memory link.
struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<uint8_t>> segments;
  size_t head_offset = 0;
  bool closed = false;

  void Write(std::span<const uint8_t> bytes) {
    std::lock_guard lock(mu);
    if (closed) throw ChannelError("write on closed in-memory channel");
    segments.emplace_back(bytes.begin(), bytes.end());
    cv.notify_all();
  }

  void Read(std::span<uint8_t> out, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu);
    size_t done = 0;
    while (done < out.size()) {
      if (!cv.wait_for(lock, timeout, [&] { return !segments.empty() || closed; })) {
        throw ChannelError("receive timed out");
      }
      if (segments.empty()) throw PeerClosed("peer disconnected");
      auto& seg = segments.front();
      size_t take = std::min(out.size() - done, seg.size() - head_offset);
      std::memcpy(out.data() + done, seg.data() + head_offset, take);
      done += take;
      head_offset += take;
      if (head_offset == seg.size()) {
        segments.pop_front();
        head_offset = 0;
      }
    }
  }

  void Close() {
    std::lock_guard lock(mu);
    closed = true;
    cv.notify_all();
  }
};

class MemoryChannel final : public Channel {
 public:
  MemoryChannel(std::shared_ptr<Pipe> in, std::shared_ptr<Pipe> out)
      : in_(std::move(in)), out_(std::move(out)) {}
  ~MemoryChannel() override { Close(); }

  void Close() override {
    in_->Close();
    out_->Close();
  }

 protected:
  void WriteAll(std::span<const uint8_t> bytes) override { out_->Write(bytes); }
  void ReadExact(std::span<uint8_t> out) override { in_->Read(out, recv_timeout()); }

 private:
  std::shared_ptr<Pipe> in_;
  std::shared_ptr<Pipe> out_;
};

class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {
    int one = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpChannel() override { Close(); }

  void Close() override {
    std::lock_guard lock(mu_);
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 protected:
  void WriteAll(std::span<const uint8_t> bytes) override {
    size_t done = 0;
    while (done < bytes.size()) {
      if (fd_ < 0) throw ChannelError("write on closed socket");
      ssize_t n = ::send(fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ChannelError(std::string("send failed: ") + std::strerror(errno));
      }
      done += static_cast<size_t>(n);
    }
  }

  void ReadExact(std::span<uint8_t> out) override {
    size_t done = 0;
    while (done < out.size()) {
      if (fd_ < 0) throw ChannelError("read on closed socket");
      pollfd pfd{fd_, POLLIN, 0};
      int rc = ::poll(&pfd, 1, static_cast<int>(recv_timeout().count()));
      if (rc == 0) throw ChannelError("receive timed out");
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw ChannelError(std::string("poll failed: ") + std::strerror(errno));
      }
      ssize_t n = ::recv(fd_, out.data() + done, out.size() - done, 0);
      if (n == 0) throw PeerClosed("peer disconnected");
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ChannelError(std::string("recv failed: ") + std::strerror(errno));
      }
      done += static_cast<size_t>(n);
    }
  }

 private:
  std::mutex mu_;
  int fd_;
};

addrinfo* Resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  std::string port = std::to_string(ep.port);
  int rc = ::getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), port.c_str(),
                         &hints, &res);
  if (rc != 0) {
    throw ChannelError("cannot resolve " + ep.ToString() + ": " + gai_strerror(rc));
  }
  return res;
}

}  // namespace

const char* MsgTypeName(MsgType type) {
  switch (type) {
    case MsgType::kParams: return "PARAMS";
    case MsgType::kKey: return "KEY";
    case MsgType::kOtMsg: return "OT_MSG";
    case MsgType::kDelta: return "DELTA";
    case MsgType::kGammaDelta: return "GAMMA_DELTA";
    case MsgType::kPsi: return "PSI";
    case MsgType::kAbort: return "ABORT";
  }
  return "UNKNOWN";
}

ChannelMetrics& ChannelMetrics::operator+=(const ChannelMetrics& other) {
  bytes_sent += other.bytes_sent;
  bytes_received += other.bytes_received;
  frames_sent += other.frames_sent;
  frames_received += other.frames_received;
  for (size_t i = 0; i < sent_by_type.size(); ++i) {
    sent_by_type[i] += other.sent_by_type[i];
    received_by_type[i] += other.received_by_type[i];
  }
  return *this;
}

void Channel::SendFrame(MsgType type, std::span<const uint8_t> payload,
                        bool continued) {
  if (payload.size() > kMaxFramePayload) {
    throw std::length_error("frame payload exceeds 2^31 bytes");
  }
  std::vector<uint8_t> wire(kFrameHeaderBytes + payload.size());
  uint32_t len = static_cast<uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) wire[i] = static_cast<uint8_t>(len >> (8 * i));
  wire[4] = static_cast<uint8_t>(type) | (continued ? kContinuationFlag : 0);
  if (!payload.empty()) {
    std::memcpy(wire.data() + kFrameHeaderBytes, payload.data(), payload.size());
  }
  WriteAll(wire);
  if (tap_) tap_(wire);
  metrics_.bytes_sent += wire.size();
  metrics_.frames_sent += 1;
  metrics_.sent_by_type[static_cast<size_t>(type)] += wire.size();
}

void Channel::AwaitPeerClose() {
  Frame f;
  try {
    f = RecvFrame();
  } catch (const PeerClosed&) {
    return;
  }
  if (f.type == MsgType::kAbort) {
    throw ProtocolError("peer aborted: " + std::string(f.payload.begin(), f.payload.end()));
  }
  throw ProtocolError(std::string("unexpected ") + MsgTypeName(f.type) +
                      " after the final message");
}

Frame Channel::RecvFrame(std::optional<MsgType> expected) {
  uint8_t header[kFrameHeaderBytes];
  ReadExact(header);
  uint32_t len = 0;
  for (int i = 3; i >= 0; --i) len = (len << 8) | header[i];
  uint8_t raw_type = header[4] & static_cast<uint8_t>(~kContinuationFlag);
  if (!KnownType(raw_type)) {
    throw ProtocolError("unknown message type " + std::to_string(raw_type));
  }
  if (len > kMaxFramePayload) {
    throw ProtocolError("declared frame length " + std::to_string(len) +
                        " exceeds 2^31");
  }
  Frame frame;
  frame.type = static_cast<MsgType>(raw_type);
  frame.continued = (header[4] & kContinuationFlag) != 0;
  frame.payload.resize(len);
  if (len > 0) ReadExact(frame.payload);

  metrics_.bytes_received += kFrameHeaderBytes + len;
  metrics_.frames_received += 1;
  metrics_.received_by_type[raw_type] += kFrameHeaderBytes + len;

  if (expected && frame.type != *expected && frame.type != MsgType::kAbort) {
    throw ProtocolError(std::string("expected ") + MsgTypeName(*expected) +
                        " frame, got " + MsgTypeName(frame.type));
  }
  return frame;
}

void Channel::SendMessage(MsgType type, std::span<const uint8_t> payload) {
  size_t offset = 0;
  while (payload.size() - offset > chunk_bytes_) {
    SendFrame(type, payload.subspan(offset, chunk_bytes_), true);
    offset += chunk_bytes_;
  }
  SendFrame(type, payload.subspan(offset), false);
}

Frame Channel::RecvMessage(std::optional<MsgType> expected) {
  Frame first = RecvFrame(expected);
  while (first.continued) {
    Frame next = RecvFrame(first.type);
    if (next.type != first.type) {
      // Abort mid-message.
      return next;
    }
    first.payload.insert(first.payload.end(), next.payload.begin(),
                         next.payload.end());
    first.continued = next.continued;
  }
  return first;
}

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> MakeMemoryChannelPair() {
  auto ab = std::make_shared<Pipe>();
  auto ba = std::make_shared<Pipe>();
  return {std::make_unique<MemoryChannel>(ba, ab),
          std::make_unique<MemoryChannel>(ab, ba)};
}

std::unique_ptr<Channel> MemoryHub::Connect(const std::string& session, uint32_t from,
                                            uint32_t to, Side side) {
  std::lock_guard lock(mu_);
  if (auto it = pending_.find(std::make_tuple(session, from, to, side));
      it != pending_.end()) {
    auto ch = std::move(it->second);
    pending_.erase(it);
    return ch;
  }
  auto [a, b] = MakeMemoryChannelPair();
  Side other = side == Side::kFrom ? Side::kTo : Side::kFrom;
  pending_[std::make_tuple(session, from, to, other)] = std::move(b);
  return std::move(a);
}

Endpoint Endpoint::Parse(const std::string& text) {
  auto colon = text.rfind(':');
  if (colon == std::string::npos || colon + 1 == text.size()) {
    throw std::invalid_argument("endpoint must be host:port, got '" + text + "'");
  }
  unsigned long port = std::stoul(text.substr(colon + 1));
  if (port > 65535) throw std::invalid_argument("port out of range: " + text);
  return {text.substr(0, colon), static_cast<uint16_t>(port)};
}

std::string Endpoint::ToString() const { return host + ":" + std::to_string(port); }

TcpListener::TcpListener(const Endpoint& endpoint) {
  addrinfo* res = Resolve(endpoint, true);
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0) {
    ::freeaddrinfo(res);
    throw ChannelError("socket() failed");
  }
  int one = 1;
  setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  int rc = ::bind(fd_, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0 || ::listen(fd_, 8) != 0) {
    std::string err = std::strerror(errno);
    ::close(fd_);
    throw ChannelError("cannot listen on " + endpoint.ToString() + ": " + err);
  }
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Channel> TcpListener::Accept(std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (rc <= 0) throw ChannelError("timed out waiting for ring neighbor to connect");
  int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw ChannelError(std::string("accept failed: ") + std::strerror(errno));
  return std::make_unique<TcpChannel>(fd);
}

std::unique_ptr<Channel> TcpDial(const Endpoint& endpoint,
                                 std::chrono::milliseconds window) {
  auto deadline = std::chrono::steady_clock::now() + window;
  auto backoff = std::chrono::milliseconds(10);
  std::string last_error = "no attempt";
  for (;;) {
    addrinfo* res = Resolve(endpoint, false);
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      return std::make_unique<TcpChannel>(fd);
    }
    last_error = std::strerror(errno);
    if (fd >= 0) ::close(fd);
    ::freeaddrinfo(res);
    if (std::chrono::steady_clock::now() + backoff > deadline) {
      throw ChannelError("cannot reach " + endpoint.ToString() + ": " + last_error);
    }
    std::this_thread::sleep_for(backoff);
    backoff = std::min(backoff * 2, std::chrono::milliseconds(1000));
  }
}

RingChannels ConnectRing(uint32_t index, uint32_t n, const RingEndpoints& endpoints,
                         std::chrono::milliseconds window) {
  if (n < 2 || index < 1 || index > n) {
    throw std::invalid_argument("ring index out of range");
  }
  if (!endpoints.listen) throw std::invalid_argument("every party needs a listen endpoint");
  const bool leader = index == 1;
  const bool terminal = index == n;
  if (!terminal && !endpoints.next) throw std::invalid_argument("missing next endpoint");
  if (terminal && !endpoints.leader_return) {
    throw std::invalid_argument("terminal party needs the leader-return endpoint");
  }

  TcpListener listener(*endpoints.listen);
  RingChannels out;
  if (terminal) {
    out.leader_return = TcpDial(*endpoints.leader_return, window);
  } else {
    out.next = TcpDial(*endpoints.next, window);
  }
  auto accepted = listener.Accept(window);
  if (leader) {
    out.leader_return = std::move(accepted);
  } else {
    out.prev = std::move(accepted);
  }
  return out;
}

}  // namespace mpsi
