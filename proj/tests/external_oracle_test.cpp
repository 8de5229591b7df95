// Copyright 2026 The TrojanScan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <thread>

#include "fake_bridge.hpp"
#include "test_util.hpp"

namespace trojanscan {
namespace {

using namespace std::chrono_literals;
using testing::channel_mean_logits;

const std::string kBridge = FAKE_BRIDGE;

std::string exec_endpoint(const std::string &args) {
  return "exec:" + testing::shell_quote(kBridge) + " " + args;
}

ExternalOracleOptions small_dims() {
  ExternalOracleOptions options;
  options.input_dims = {16, 12};
  return options;
}

// What the endpoint sees after float32 transport.
Image as_float32(const Image &image) {
  std::vector<double> values(image.values().begin(), image.values().end());
  for (double &v : values) v = static_cast<float>(v);
  return Image(image.height(), image.width(), std::move(values));
}

std::vector<std::uint8_t> bytes_of(std::string_view s) { return {s.begin(), s.end()}; }

TEST(Base64, StandardVectors) {
  const std::pair<const char *, const char *> cases[] = {
      {"", ""},          {"f", "Zg=="},         {"fo", "Zm8="},        {"foo", "Zm9v"},
      {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="}, {"foobar", "Zm9vYmFy"}};
  for (const auto &[plain, encoded] : cases) {
    EXPECT_EQ(base64_encode(bytes_of(plain)), encoded);
    const auto back = base64_decode(encoded);
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, bytes_of(plain));
  }
  EXPECT_FALSE(base64_decode("abc").has_value());
  EXPECT_FALSE(base64_decode("!!!!").has_value());
}

TEST(PixelCodec, LittleEndianFloat32) {
  const Image one(1, 1, 1.0);
  const auto bytes = pack_pixels_f32le(one);
  ASSERT_EQ(bytes.size(), 12u);
  const std::vector<std::uint8_t> expected = {0, 0, 0x80, 0x3f};
  EXPECT_EQ(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 4), expected);

  std::mt19937_64 rng(41);
  const Image image = testing::random_real_image(rng, {5, 7});
  EXPECT_EQ(unpack_pixels_f32le(5, 7, pack_pixels_f32le(image)), as_float32(image));
  EXPECT_THROW(unpack_pixels_f32le(5, 8, pack_pixels_f32le(image)), InvalidParameter);
}

TEST(ExternalOracle, ExecRoundTrip) {
  auto oracle = connect_external_oracle(exec_endpoint("normal 5"), 5, small_dims());
  EXPECT_EQ(oracle->class_count(), 5u);
  EXPECT_NE(oracle->descriptor().find("fake-normal"), std::string::npos);
  std::mt19937_64 rng(42);
  for (int i = 0; i < 5; ++i) {
    const Image image = testing::random_real_image(rng, {16, 12});
    const Logits got = oracle->query(image);
    const Logits want = channel_mean_logits(as_float32(image), 5);
    ASSERT_EQ(got.size(), 5u);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(got[k], want[k]);
  }
  EXPECT_THROW(oracle->query(Image(12, 16)), InvalidParameter);
}

TEST(ExternalOracle, AcceptsAnnouncedClassCountWhenUnspecified) {
  auto oracle = connect_external_oracle(exec_endpoint("normal 9"), 0, small_dims());
  EXPECT_EQ(oracle->class_count(), 9u);
}

TEST(ExternalOracle, ClassCountMismatchFailsHandshake) {
  EXPECT_THROW(connect_external_oracle(exec_endpoint("normal 5"), 7, small_dims()), OracleError);
}

TEST(ExternalOracle, OutOfOrderResponsesMatchedById) {
  auto oracle = connect_external_oracle(exec_endpoint("reverse 6"), 6, small_dims());
  std::mt19937_64 rng(43);
  std::vector<Image> images;
  for (int i = 0; i < 6; ++i) images.push_back(testing::random_real_image(rng, {16, 12}));
  const auto results = oracle->query_pipelined(images);
  ASSERT_EQ(results.size(), images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Logits want = channel_mean_logits(as_float32(images[i]), 6);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_DOUBLE_EQ(results[i][k], want[k]);
  }
}

struct ViolationCase {
  const char *mode;
  const char *message;
};

class ProtocolViolation : public ::testing::TestWithParam<ViolationCase> {};

TEST_P(ProtocolViolation, RaisesOracleError) {
  auto oracle = connect_external_oracle(exec_endpoint(std::string(GetParam().mode) + " 5"), 5,
                                        small_dims());
  try {
    oracle->query(Image(16, 12, 0.5));
    FAIL() << "expected OracleError";
  } catch (const OracleError &e) {
    EXPECT_NE(std::string(e.what()).find(GetParam().message), std::string::npos) << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(
    Modes, ProtocolViolation,
    ::testing::Values(ViolationCase{"short", "returned 4 logits"},
                      ViolationCase{"text", "non-numeric"}, ViolationCase{"error", "boom"},
                      ViolationCase{"exit", "closed"}, ViolationCase{"badid", "unknown id"}),
    [](const auto &info) { return std::string(info.param.mode); });

TEST(ExternalOracle, QueryTimeout) {
  ExternalOracleOptions options = small_dims();
  options.query_timeout = 300ms;
  auto oracle = connect_external_oracle(exec_endpoint("silent 5"), 5, options);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(oracle->query(Image(16, 12)), OracleError);
  EXPECT_LT(std::chrono::steady_clock::now() - start, 10s);
}

TEST(ExternalOracle, HandshakeTimeout) {
  ExternalOracleOptions options = small_dims();
  options.handshake_timeout = 300ms;
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(connect_external_oracle(exec_endpoint("nohello 5"), 5, options), OracleError);
  EXPECT_LT(std::chrono::steady_clock::now() - start, 10s);
}

TEST(ExternalOracle, FailedHelloAndDeadEndpoints) {
  EXPECT_THROW(connect_external_oracle(exec_endpoint("failhello 5"), 5), OracleError);
  EXPECT_THROW(connect_external_oracle("exec:/nonexistent/bridge-binary", 5), OracleError);
  EXPECT_THROW(connect_external_oracle("tcp:127.0.0.1:1", 5), OracleError);
  EXPECT_THROW(connect_external_oracle("udp:127.0.0.1:1", 5), InvalidParameter);
  EXPECT_THROW(connect_external_oracle("tcp:nohost", 5), InvalidParameter);
}

TEST(ExternalOracle, TcpTransport) {
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(listener, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::bind(listener, reinterpret_cast<sockaddr *>(&addr), sizeof addr), 0);
  ASSERT_EQ(::listen(listener, 1), 0);
  socklen_t len = sizeof addr;
  ::getsockname(listener, reinterpret_cast<sockaddr *>(&addr), &len);
  const int port = ntohs(addr.sin_port);

  std::thread server([listener] {
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) return;
    FILE *in = fdopen(fd, "r");
    FILE *out = fdopen(::dup(fd), "w");
    testing::FakeBridge("normal", 5).serve(in, out);
    std::fclose(in);
    std::fclose(out);
  });
  {
    auto oracle =
        connect_external_oracle("tcp:127.0.0.1:" + std::to_string(port), 5, small_dims());
    const Image image(16, 12, 0.25);
    const Logits got = oracle->query(image);
    const Logits want = channel_mean_logits(image, 5);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(got[k], want[k]);
  }
  server.join();
  ::close(listener);
}

}  // namespace
}  // namespace trojanscan
