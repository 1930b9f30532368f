#include <gtest/gtest.h>

#include <future>
#include <random>

#include "eeg/server.hpp"
#include "eeg/wire.hpp"
#include "support/synthetic.hpp"

namespace eeg {
namespace {

class WireTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng{77};
  PrototypeSet proto = synthetic::random_prototypes(rng, 32, 64);

  EmbeddingTrace fixture(std::uint32_t votes, std::string id = "vicuna-refuse") {
    return synthetic::trace_with_votes(rng, proto, synthetic::spread_votes(32, 24, votes), 0.05,
                                       std::move(id));
  }
};

TEST_F(WireTest, FrameIsLengthPrefixed) {
  const wire::Bytes payload = {1, 2, 3};
  EXPECT_EQ(wire::frame(payload), (wire::Bytes{3, 0, 0, 0, 1, 2, 3}));
}

TEST_F(WireTest, RequestRoundTrip) {
  const auto trace = fixture(20);
  const auto decoded = wire::decode_request(wire::encode_request(trace));
  EXPECT_EQ(decoded.prompt_id, trace.prompt_id);
  EXPECT_EQ(decoded.layers, trace.layers);
  EXPECT_EQ(decoded.n_layers, 32u);
  EXPECT_EQ(decoded.dim, 64u);
}

TEST_F(WireTest, VerdictCarriesRefusalTextOnlyWhenRefusing) {
  const auto refuse = std::get<wire::WireVerdict>(wire::decode_response(
      wire::handle_request(wire::encode_request(fixture(20)), proto, GuardConfig::vicuna_like())));
  EXPECT_EQ(refuse.decision, Decision::Refuse);
  EXPECT_EQ(refuse.harmfulness_score, 20u);
  EXPECT_EQ(refuse.layers_used, 24u);
  EXPECT_EQ(refuse.refusal_text, "Sorry, but I cannot help that.");

  const auto allow = std::get<wire::WireVerdict>(wire::decode_response(
      wire::handle_request(wire::encode_request(fixture(7)), proto, GuardConfig::vicuna_like())));
  EXPECT_EQ(allow.decision, Decision::Allow);
  EXPECT_EQ(allow.harmfulness_score, 7u);
  EXPECT_TRUE(allow.refusal_text.empty());
}

TEST_F(WireTest, MalformedPayloadsBecomeErrorFrames) {
  const auto good = wire::encode_request(fixture(3));
  std::vector<wire::Bytes> bad = {{}, {'n', 'o', 'p', 'e'}};
  bad.push_back(wire::Bytes(good.begin(), good.end() - 1));
  auto trailing = good;
  trailing.push_back(0);
  bad.push_back(trailing);
  auto nan = good;
  nan[16] = 0x00, nan[17] = 0x00, nan[18] = 0xC0, nan[19] = 0x7F;
  bad.push_back(nan);
  for (const auto& payload : bad) {
    const auto reply = wire::decode_response(wire::handle_request(payload, proto, {}));
    ASSERT_TRUE(std::holds_alternative<wire::WireError>(reply));
    EXPECT_EQ(std::get<wire::WireError>(reply).code, wire::ErrorCode::Malformed);
  }
}

TEST_F(WireTest, ShapeMismatchHasItsOwnCode) {
  const auto other = synthetic::random_trace(rng, "narrow", 32, 63);
  const auto reply =
      wire::decode_response(wire::handle_request(wire::encode_request(other), proto, {}));
  ASSERT_TRUE(std::holds_alternative<wire::WireError>(reply));
  EXPECT_EQ(std::get<wire::WireError>(reply).code, wire::ErrorCode::ShapeMismatch);
}

TEST(Endpoint, Parses) {
  EXPECT_EQ(net::parse_endpoint("127.0.0.1:9000").port, 9000);
  EXPECT_EQ(net::parse_endpoint(":9001").host, "127.0.0.1");
  EXPECT_EQ(net::parse_endpoint("9002").port, 9002);
  EXPECT_EQ(net::parse_endpoint("localhost:0").port, 0);
  EXPECT_THROW(net::parse_endpoint("host:notaport"), Error);
  EXPECT_THROW(net::parse_endpoint("host:70000"), Error);
}

class ServerTest : public WireTest {
 protected:
  void SetUp() override {
    server = std::make_unique<GuardServer>(proto, GuardConfig::vicuna_like());
    port = server->listen("127.0.0.1:0");
    server->start();
  }
  void TearDown() override { server->stop(); }

  std::unique_ptr<GuardServer> server;
  std::uint16_t port = 0;
};

TEST_F(ServerTest, ScoresOverLoopback) {
  GuardClient client("127.0.0.1", port);
  const auto v = std::get<wire::WireVerdict>(client.score(fixture(20)));
  EXPECT_EQ(v.decision, Decision::Refuse);
  EXPECT_EQ(v.harmfulness_score, 20u);
  const auto a = std::get<wire::WireVerdict>(client.score(fixture(7)));
  EXPECT_EQ(a.decision, Decision::Allow);
}

TEST_F(ServerTest, ConnectionSurvivesMalformedFrame) {
  GuardClient client("127.0.0.1", port);
  const auto err = wire::decode_response(client.round_trip(wire::Bytes{'j', 'u', 'n', 'k'}));
  ASSERT_TRUE(std::holds_alternative<wire::WireError>(err));
  EXPECT_EQ(std::get<wire::WireError>(err).code, wire::ErrorCode::Malformed);
  const auto v = client.score(fixture(20));
  EXPECT_TRUE(std::holds_alternative<wire::WireVerdict>(v));
}

TEST_F(ServerTest, ShapeMismatchOverLoopback) {
  GuardClient client("127.0.0.1", port);
  const auto reply = client.score(synthetic::random_trace(rng, "wide", 32, 65));
  ASSERT_TRUE(std::holds_alternative<wire::WireError>(reply));
  EXPECT_EQ(std::get<wire::WireError>(reply).code, wire::ErrorCode::ShapeMismatch);
}

TEST_F(ServerTest, ConcurrentIdenticalRequestsGetIdenticalBytes) {
  const auto request = wire::encode_request(fixture(20));
  auto ask = [&] {
    GuardClient client("127.0.0.1", port);
    std::vector<wire::Bytes> replies;
    for (int i = 0; i < 20; ++i) replies.push_back(client.round_trip(request));
    return replies;
  };
  auto a = std::async(std::launch::async, ask);
  auto b = std::async(std::launch::async, ask);
  const auto ra = a.get(), rb = b.get();
  for (std::size_t i = 0; i < ra.size(); ++i) {
    EXPECT_EQ(ra[i], rb[i]);
    EXPECT_EQ(ra[i], ra[0]);
  }
  EXPECT_EQ(ra[0], wire::handle_request(request, proto, GuardConfig::vicuna_like()));
}

TEST_F(ServerTest, OversizedFrameIsAnsweredThenClosed) {
  GuardClient client("127.0.0.1", port);
  client.send_raw(wire::Bytes{0xFF, 0xFF, 0xFF, 0xFF});
  const auto reply = wire::decode_response(client.receive());
  ASSERT_TRUE(std::holds_alternative<wire::WireError>(reply));
  EXPECT_EQ(std::get<wire::WireError>(reply).message, "frame too large");
  EXPECT_THROW(client.receive(), Error);
}

TEST_F(ServerTest, ReloadSwapsConfiguration) {
  GuardClient client("127.0.0.1", port);
  auto stricter = GuardConfig::vicuna_like();
  stricter.threshold = 25;
  server->reload(proto, stricter);
  const auto v = std::get<wire::WireVerdict>(client.score(fixture(20)));
  EXPECT_EQ(v.decision, Decision::Allow);
}

TEST_F(ServerTest, StopClosesIdleSessions) {
  GuardClient client("127.0.0.1", port);
  EXPECT_TRUE(std::holds_alternative<wire::WireVerdict>(client.score(fixture(1))));
  server->stop();
  EXPECT_THROW(client.score(fixture(1)), Error);
}

}  // namespace
}  // namespace eeg
