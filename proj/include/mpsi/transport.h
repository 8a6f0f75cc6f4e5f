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

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace mpsi {

enum class MsgType : uint8_t {
  kParams = 1,
  kKey = 2,
  kOtMsg = 3,
  kDelta = 4,
  kGammaDelta = 5,
  kPsi = 6,
  kAbort = 7,
};

const char* MsgTypeName(MsgType type);

// Wire layout: u32 little-endian payload length, one type byte, payload.
// The type byte's high bit marks a chunk that continues in the next frame.
inline constexpr size_t kFrameHeaderBytes = 5;
inline constexpr uint8_t kContinuationFlag = 0x80;
inline constexpr uint64_t kMaxFramePayload = uint64_t{1} << 31;
inline constexpr size_t kDefaultChunkBytes = size_t{64} << 20;

struct Frame {
  MsgType type = MsgType::kAbort;
  bool continued = false;
  std::vector<uint8_t> payload;
};

struct ChannelMetrics {
  uint64_t bytes_sent = 0;
  uint64_t bytes_received = 0;
  uint64_t frames_sent = 0;
  uint64_t frames_received = 0;
  // Wire bytes (headers included) per message type, indexed by type value.
  std::array<uint64_t, 8> sent_by_type{};
  std::array<uint64_t, 8> received_by_type{};

  uint64_t SentOf(MsgType t) const { return sent_by_type[static_cast<size_t>(t)]; }
  uint64_t ReceivedOf(MsgType t) const {
    return received_by_type[static_cast<size_t>(t)];
  }
  ChannelMetrics& operator+=(const ChannelMetrics& other);
};

// Transport failure: peer gone, timeout, I/O error.
class ChannelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The peer closed the channel (end of stream).
class PeerClosed : public ChannelError {
 public:
  using ChannelError::ChannelError;
};

// Peer sent something the protocol does not allow at this point.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ordered, reliable, framed byte channel. One state machine drives a channel
// at a time; handing it to another thread is safe between calls.
class Channel {
 public:
  virtual ~Channel() = default;

  // One frame. Throws ChannelError if closed, std::length_error if the
  // payload exceeds 2^31 bytes.
  void SendFrame(MsgType type, std::span<const uint8_t> payload,
                 bool continued = false);
  // One frame. With `expected`, any other type except kAbort throws
  // ProtocolError.
  Frame RecvFrame(std::optional<MsgType> expected = std::nullopt);

  // Whole message, split into chunk_bytes() pieces when larger.
  void SendMessage(MsgType type, std::span<const uint8_t> payload);
  // Reassembles continuation chunks into one frame.
  Frame RecvMessage(std::optional<MsgType> expected = std::nullopt);

  // Blocks until the peer closes the channel. An ABORT or any other frame
  // throws ProtocolError; timeouts and I/O errors throw ChannelError.
  void AwaitPeerClose();

  virtual void Close() = 0;

  const ChannelMetrics& metrics() const { return metrics_; }

  void set_chunk_bytes(size_t n) { chunk_bytes_ = n; }
  size_t chunk_bytes() const { return chunk_bytes_; }
  void set_recv_timeout(std::chrono::milliseconds t) { recv_timeout_ = t; }
  std::chrono::milliseconds recv_timeout() const { return recv_timeout_; }
  // Observes every outgoing frame's exact wire bytes.
  void set_send_tap(std::function<void(std::span<const uint8_t>)> tap) {
    tap_ = std::move(tap);
  }

 protected:
  virtual void WriteAll(std::span<const uint8_t> bytes) = 0;
  virtual void ReadExact(std::span<uint8_t> out) = 0;

 private:
  ChannelMetrics metrics_;
  size_t chunk_bytes_ = kDefaultChunkBytes;
  std::chrono::milliseconds recv_timeout_{std::chrono::minutes(5)};
  std::function<void(std::span<const uint8_t>)> tap_;
};

// Two connected in-process endpoints.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> MakeMemoryChannelPair();

// In-process rendezvous keyed by (session id, directed edge from -> to). The
// first Connect for an edge creates the pair; the other side's Connect picks
// up the remaining end.
class MemoryHub {
 public:
  enum class Side { kFrom, kTo };
  std::unique_ptr<Channel> Connect(const std::string& session, uint32_t from,
                                   uint32_t to, Side side);

 private:
  std::mutex mu_;
  std::map<std::tuple<std::string, uint32_t, uint32_t, Side>, std::unique_ptr<Channel>>
      pending_;
};

struct Endpoint {
  std::string host;
  uint16_t port = 0;

  // "host:port"
  static Endpoint Parse(const std::string& text);
  std::string ToString() const;
};

class TcpListener {
 public:
  explicit TcpListener(const Endpoint& endpoint);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::unique_ptr<Channel> Accept(std::chrono::milliseconds timeout);
  uint16_t port() const { return port_; }

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

// Retries with exponential backoff (10 ms doubling to 1 s) until `window`
// elapses.
std::unique_ptr<Channel> TcpDial(const Endpoint& endpoint,
                                 std::chrono::milliseconds window);

struct RingEndpoints {
  std::optional<Endpoint> listen;         // prev (or P_n for the leader) dials here
  std::optional<Endpoint> next;           // P_{i+1}
  std::optional<Endpoint> leader_return;  // P_n only: the leader's listener
};

struct RingChannels {
  std::unique_ptr<Channel> prev;           // from P_{i-1}; null for the leader
  std::unique_ptr<Channel> next;           // to P_{i+1}; null for P_n
  std::unique_ptr<Channel> leader_return;  // P_n -> P_1 edge, seen from either end
};

// Party i listens for i - 1 and dials i + 1; P_n also dials P_1. Listening
// starts before dialing so no ordering between processes is needed.
RingChannels ConnectRing(uint32_t index, uint32_t n, const RingEndpoints& endpoints,
                         std::chrono::milliseconds window);

}  // namespace mpsi
