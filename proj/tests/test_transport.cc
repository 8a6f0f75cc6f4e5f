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

#include <gtest/gtest.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>
#include <thread>

#include "mpsi/transport.h"
#include "test_util.h"

namespace mpsi {
namespace {

using namespace std::chrono_literals;

std::vector<uint8_t> Bytes(std::initializer_list<uint8_t> b) { return b; }

TEST(Transport, EmptyPayloadIsFiveBytes) {
  auto [a, b] = MakeMemoryChannelPair();
  std::vector<uint8_t> wire;
  a->set_send_tap([&](std::span<const uint8_t> f) { wire.assign(f.begin(), f.end()); });
  a->SendFrame(MsgType::kKey, {});
  EXPECT_EQ(wire, Bytes({0, 0, 0, 0, 2}));
  EXPECT_EQ(a->metrics().bytes_sent, 5u);
  Frame f = b->RecvFrame();
  EXPECT_EQ(f.type, MsgType::kKey);
  EXPECT_TRUE(f.payload.empty());
  EXPECT_EQ(b->metrics().bytes_received, 5u);
}

TEST(Transport, HeaderIsLittleEndian) {
  auto [a, b] = MakeMemoryChannelPair();
  std::vector<uint8_t> wire;
  a->set_send_tap([&](std::span<const uint8_t> f) { wire.assign(f.begin(), f.end()); });
  std::vector<uint8_t> payload(0x0102, 0xAB);
  a->SendFrame(MsgType::kPsi, payload);
  ASSERT_EQ(wire.size(), 5u + 0x0102);
  EXPECT_EQ(wire[0], 0x02);
  EXPECT_EQ(wire[1], 0x01);
  EXPECT_EQ(wire[2], 0);
  EXPECT_EQ(wire[3], 0);
  EXPECT_EQ(wire[4], 6);
}

TEST(Transport, RoundTripAndAdditiveMetrics) {
  auto [a, b] = MakeMemoryChannelPair();
  auto p1 = Bytes({1, 2, 3}), p2 = std::vector<uint8_t>(1000, 7);
  a->SendFrame(MsgType::kDelta, p1);
  a->SendFrame(MsgType::kGammaDelta, p2);
  EXPECT_EQ(a->metrics().bytes_sent, 10u + p1.size() + p2.size());
  EXPECT_EQ(a->metrics().frames_sent, 2u);
  EXPECT_EQ(a->metrics().SentOf(MsgType::kDelta), 8u);
  EXPECT_EQ(a->metrics().SentOf(MsgType::kGammaDelta), 1005u);
  Frame f1 = b->RecvFrame(MsgType::kDelta);
  Frame f2 = b->RecvFrame(MsgType::kGammaDelta);
  EXPECT_EQ(f1.payload, p1);
  EXPECT_EQ(f2.payload, p2);
  EXPECT_EQ(b->metrics().bytes_received, a->metrics().bytes_sent);
  EXPECT_EQ(b->metrics().ReceivedOf(MsgType::kGammaDelta), 1005u);
}

TEST(Transport, ExpectedTypeMismatchIsProtocolError) {
  auto [a, b] = MakeMemoryChannelPair();
  a->SendFrame(MsgType::kKey, Bytes({1}));
  EXPECT_THROW(b->RecvFrame(MsgType::kDelta), ProtocolError);
}

TEST(Transport, AbortAlwaysAccepted) {
  auto [a, b] = MakeMemoryChannelPair();
  a->SendFrame(MsgType::kAbort, Bytes({'x'}));
  Frame f = b->RecvFrame(MsgType::kDelta);
  EXPECT_EQ(f.type, MsgType::kAbort);
}

TEST(Transport, ChunkingReassembles) {
  auto [a, b] = MakeMemoryChannelPair();
  a->set_chunk_bytes(10);
  std::vector<uint8_t> payload(35);
  for (size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<uint8_t>(i);
  std::vector<std::vector<uint8_t>> frames;
  a->set_send_tap([&](std::span<const uint8_t> f) { frames.emplace_back(f.begin(), f.end()); });
  a->SendMessage(MsgType::kGammaDelta, payload);
  ASSERT_EQ(frames.size(), 4u);
  EXPECT_EQ(frames[0][4], 5 | kContinuationFlag);
  EXPECT_EQ(frames[2][4], 5 | kContinuationFlag);
  EXPECT_EQ(frames[3][4], 5);
  EXPECT_EQ(frames[3].size(), 5u + 5);
  EXPECT_EQ(a->metrics().bytes_sent, 35u + 4 * 5);
  Frame f = b->RecvMessage(MsgType::kGammaDelta);
  EXPECT_EQ(f.payload, payload);
  EXPECT_FALSE(f.continued);
}

TEST(Transport, ExactMultipleOfChunkHasNoEmptyTail) {
  auto [a, b] = MakeMemoryChannelPair();
  a->set_chunk_bytes(10);
  a->SendMessage(MsgType::kDelta, std::vector<uint8_t>(20, 1));
  EXPECT_EQ(a->metrics().frames_sent, 2u);
  EXPECT_EQ(b->RecvMessage().payload.size(), 20u);
}

TEST(Transport, AbortInsideChunkedMessage) {
  auto [a, b] = MakeMemoryChannelPair();
  a->SendFrame(MsgType::kDelta, Bytes({1, 2}), true);
  a->SendFrame(MsgType::kAbort, {});
  EXPECT_EQ(b->RecvMessage(MsgType::kDelta).type, MsgType::kAbort);
}

TEST(Transport, OversizedPayloadRejected) {
  auto [a, b] = MakeMemoryChannelPair();
  uint8_t x = 0;
  // Length is checked before any byte is read.
  std::span<const uint8_t> huge(&x, static_cast<size_t>(kMaxFramePayload) + 1);
  EXPECT_THROW(a->SendFrame(MsgType::kDelta, huge), std::length_error);
}

TEST(Transport, ClosedChannel) {
  auto [a, b] = MakeMemoryChannelPair();
  b->Close();
  EXPECT_THROW(a->SendFrame(MsgType::kKey, {}), ChannelError);
  EXPECT_THROW(a->RecvFrame(), ChannelError);
}

TEST(Transport, PendingFramesSurvivePeerClose) {
  auto [a, b] = MakeMemoryChannelPair();
  a->SendFrame(MsgType::kAbort, Bytes({1}));
  a->Close();
  EXPECT_EQ(b->RecvFrame().type, MsgType::kAbort);
  EXPECT_THROW(b->RecvFrame(), ChannelError);
}

TEST(Transport, AwaitPeerCloseReturnsOnCleanClose) {
  auto [a, b] = MakeMemoryChannelPair();
  auto waiter = std::async(std::launch::async, [&] { a->AwaitPeerClose(); });
  std::this_thread::sleep_for(20ms);
  b->Close();
  EXPECT_NO_THROW(waiter.get());
}

TEST(Transport, AwaitPeerCloseRejectsAbortAndData) {
  {
    auto [a, b] = MakeMemoryChannelPair();
    b->SendFrame(MsgType::kAbort, Bytes({'x'}));
    EXPECT_THROW(a->AwaitPeerClose(), ProtocolError);
  }
  {
    auto [a, b] = MakeMemoryChannelPair();
    b->SendFrame(MsgType::kPsi, Bytes({1}));
    b->Close();
    EXPECT_THROW(a->AwaitPeerClose(), ProtocolError);
  }
  {
    auto [a, b] = MakeMemoryChannelPair();
    a->set_recv_timeout(30ms);
    try {
      a->AwaitPeerClose();
      FAIL() << "expected a timeout";
    } catch (const PeerClosed&) {
      FAIL() << "timeout reported as a clean close";
    } catch (const ChannelError&) {
    }
  }
}

TEST(Transport, ReceiveTimeout) {
  auto [a, b] = MakeMemoryChannelPair();
  b->set_recv_timeout(50ms);
  auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(b->RecvFrame(), ChannelError);
  EXPECT_GE(std::chrono::steady_clock::now() - t0, 40ms);
}

TEST(Transport, CrossThreadDelivery) {
  auto [a, b] = MakeMemoryChannelPair();
  std::thread t([&, &a = a] {
    for (uint8_t i = 0; i < 100; ++i) a->SendFrame(MsgType::kPsi, Bytes({i}));
  });
  for (uint8_t i = 0; i < 100; ++i) EXPECT_EQ(b->RecvFrame().payload, Bytes({i}));
  t.join();
}

TEST(Transport, MemoryHubPairsDirectedEdges) {
  MemoryHub hub;
  auto a = hub.Connect("s", 1, 2, MemoryHub::Side::kFrom);
  auto b = hub.Connect("s", 2, 1, MemoryHub::Side::kFrom);
  auto a_peer = hub.Connect("s", 1, 2, MemoryHub::Side::kTo);
  auto b_peer = hub.Connect("s", 2, 1, MemoryHub::Side::kTo);
  a->SendFrame(MsgType::kKey, Bytes({12}));
  b->SendFrame(MsgType::kKey, Bytes({21}));
  EXPECT_EQ(a_peer->RecvFrame().payload, Bytes({12}));
  EXPECT_EQ(b_peer->RecvFrame().payload, Bytes({21}));
  // A second session with the same edge is separate.
  auto c = hub.Connect("t", 1, 2, MemoryHub::Side::kTo);
  auto c_peer = hub.Connect("t", 1, 2, MemoryHub::Side::kFrom);
  c->SendFrame(MsgType::kKey, Bytes({3}));
  EXPECT_EQ(c_peer->RecvFrame().payload, Bytes({3}));
}

TEST(Transport, EndpointParse) {
  Endpoint e = Endpoint::Parse("127.0.0.1:9000");
  EXPECT_EQ(e.host, "127.0.0.1");
  EXPECT_EQ(e.port, 9000);
  EXPECT_EQ(e.ToString(), "127.0.0.1:9000");
  EXPECT_THROW(Endpoint::Parse("nohost"), std::invalid_argument);
  EXPECT_THROW(Endpoint::Parse("h:"), std::invalid_argument);
  EXPECT_THROW(Endpoint::Parse("h:70000"), std::invalid_argument);
}

TEST(Transport, TcpRoundTrip) {
  TcpListener listener(Endpoint{"127.0.0.1", 0});
  Endpoint ep{"127.0.0.1", listener.port()};
  auto dialed = std::async(std::launch::async, [&] { return TcpDial(ep, 5s); });
  auto accepted = listener.Accept(5s);
  auto client = dialed.get();
  std::vector<uint8_t> big(3 << 20, 0x5A);
  client->set_chunk_bytes(1 << 20);
  auto sender = std::async(std::launch::async,
                           [&] { client->SendMessage(MsgType::kGammaDelta, big); });
  Frame f = accepted->RecvMessage(MsgType::kGammaDelta);
  sender.get();
  EXPECT_EQ(f.payload, big);
  accepted->SendFrame(MsgType::kPsi, Bytes({9}));
  EXPECT_EQ(client->RecvFrame(MsgType::kPsi).payload, Bytes({9}));
  client->Close();
  EXPECT_THROW(accepted->RecvFrame(), ChannelError);
}

// Raw socket writer for malformed headers.
void WriteRaw(uint16_t port, std::vector<uint8_t> bytes, TcpListener& listener,
              const std::function<void(Channel&)>& check) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)), 0);
  auto ch = listener.Accept(std::chrono::seconds(5));
  ASSERT_EQ(::send(fd, bytes.data(), bytes.size(), 0), static_cast<ssize_t>(bytes.size()));
  check(*ch);
  ::close(fd);
}

TEST(Transport, UnknownTypeIsProtocolError) {
  TcpListener listener(Endpoint{"127.0.0.1", 0});
  WriteRaw(listener.port(), {0, 0, 0, 0, 9}, listener,
           [](Channel& ch) { EXPECT_THROW(ch.RecvFrame(), ProtocolError); });
  WriteRaw(listener.port(), {0, 0, 0, 0, 0}, listener,
           [](Channel& ch) { EXPECT_THROW(ch.RecvFrame(), ProtocolError); });
}

TEST(Transport, OversizedDeclaredLengthIsProtocolError) {
  TcpListener listener(Endpoint{"127.0.0.1", 0});
  WriteRaw(listener.port(), {0xff, 0xff, 0xff, 0xff, 4}, listener,
           [](Channel& ch) { EXPECT_THROW(ch.RecvFrame(), ProtocolError); });
}

TEST(Transport, TruncatedFrameIsChannelError) {
  TcpListener listener(Endpoint{"127.0.0.1", 0});
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(listener.port());
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)), 0);
  auto ch = listener.Accept(5s);
  uint8_t partial[] = {10, 0, 0, 0, 4, 1, 2};
  ASSERT_EQ(::send(fd, partial, sizeof(partial), 0), 7);
  ::close(fd);
  EXPECT_THROW(ch->RecvFrame(), ChannelError);
}

TEST(Transport, DialGivesUpAfterWindow) {
  uint16_t port = testing::FreePort();
  auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(TcpDial(Endpoint{"127.0.0.1", port}, 200ms), ChannelError);
  auto elapsed = std::chrono::steady_clock::now() - t0;
  EXPECT_LT(elapsed, 2s);
}

TEST(Transport, DialRetriesUntilListenerAppears) {
  uint16_t port = testing::FreePort();
  auto dialed = std::async(std::launch::async,
                           [&] { return TcpDial(Endpoint{"127.0.0.1", port}, 5s); });
  std::this_thread::sleep_for(150ms);
  TcpListener listener(Endpoint{"127.0.0.1", port});
  auto accepted = listener.Accept(5s);
  auto client = dialed.get();
  client->SendFrame(MsgType::kKey, Bytes({1}));
  EXPECT_EQ(accepted->RecvFrame().payload, Bytes({1}));
}

TEST(Transport, AcceptTimesOut) {
  TcpListener listener(Endpoint{"127.0.0.1", 0});
  EXPECT_THROW(listener.Accept(50ms), ChannelError);
}

TEST(Transport, ConnectRingWiresAllEdges) {
  for (uint32_t n : {2u, 3u, 4u}) {
    std::vector<Endpoint> listen;
    for (uint32_t i = 0; i < n; ++i) listen.push_back({"127.0.0.1", testing::FreePort()});
    std::vector<std::future<RingChannels>> parties;
    for (uint32_t i = 1; i <= n; ++i) {
      RingEndpoints eps;
      eps.listen = listen[i - 1];
      if (i < n) eps.next = listen[i];
      if (i == n) eps.leader_return = listen[0];
      parties.push_back(std::async(std::launch::async,
                                   [=] { return ConnectRing(i, n, eps, 10s); }));
    }
    std::vector<RingChannels> rings;
    for (auto& f : parties) rings.push_back(f.get());
    for (uint32_t i = 1; i < n; ++i) {
      ASSERT_TRUE(rings[i - 1].next);
      ASSERT_TRUE(rings[i].prev);
      rings[i - 1].next->SendFrame(MsgType::kKey, Bytes({static_cast<uint8_t>(i)}));
      EXPECT_EQ(rings[i].prev->RecvFrame().payload, Bytes({static_cast<uint8_t>(i)}));
    }
    EXPECT_FALSE(rings[0].prev);
    EXPECT_FALSE(rings[n - 1].next);
    ASSERT_TRUE(rings[0].leader_return);
    ASSERT_TRUE(rings[n - 1].leader_return);
    rings[n - 1].leader_return->SendFrame(MsgType::kPsi, Bytes({42}));
    EXPECT_EQ(rings[0].leader_return->RecvFrame().payload, Bytes({42}));
  }
}

TEST(Transport, ConnectRingValidatesEndpoints) {
  RingEndpoints eps;
  EXPECT_THROW(ConnectRing(1, 3, eps, 1s), std::invalid_argument);
  eps.listen = Endpoint{"127.0.0.1", 0};
  EXPECT_THROW(ConnectRing(1, 3, eps, 1s), std::invalid_argument);
  EXPECT_THROW(ConnectRing(3, 3, eps, 1s), std::invalid_argument);
  EXPECT_THROW(ConnectRing(0, 3, eps, 1s), std::invalid_argument);
  EXPECT_THROW(ConnectRing(1, 1, eps, 1s), std::invalid_argument);
}

}  // namespace
}  // namespace mpsi
