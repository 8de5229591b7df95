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

// Client for models hosted in another process, spoken to over JSON lines.
//
//   engine -> {"op":"hello"}
//   bridge -> {"op":"hello","class_count":T,"model":"descriptor"}
//   engine -> {"id":N,"op":"query","height":H,"width":W,"pixels_b64":"..."}
//   bridge -> {"id":N,"logits":[...]}  or  {"id":N,"error":"msg"}
//
// pixels_b64 holds H*W*3 little-endian float32 values in [0,1], RGB,
// row-major. Responses may arrive out of order; they are matched by id.

#ifndef TROJANSCAN_EXTERNAL_ORACLE_HPP_
#define TROJANSCAN_EXTERNAL_ORACLE_HPP_

#include <fcntl.h>
#include <netdb.h>
#include <openssl/evp.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "trojanscan/error.hpp"
#include "trojanscan/image.hpp"
#include "trojanscan/oracle.hpp"

extern char **environ;

namespace trojanscan {

inline std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char *>(out.data()),
                                bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

// Returns nullopt for malformed input.
inline std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) return std::nullopt;
  std::vector<std::uint8_t> out(3 * (text.size() / 4));
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char *>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) return std::nullopt;
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() >= 2 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

// Packs an image as little-endian float32, the wire format for pixels.
inline std::vector<std::uint8_t> pack_pixels_f32le(const Image &image) {
  const auto values = image.values();
  std::vector<std::uint8_t> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (std::size_t b = 0; b < 4; ++b) {
      bytes[4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
  }
  return bytes;
}

inline Image unpack_pixels_f32le(std::size_t height, std::size_t width,
                                 std::span<const std::uint8_t> bytes) {
  if (bytes.size() != height * width * 3 * 4) {
    throw InvalidParameter("pixel payload has " + std::to_string(bytes.size()) +
                           " bytes, expected " + std::to_string(height * width * 12));
  }
  std::vector<double> values(height * width * 3);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (std::size_t b = 0; b < 4; ++b) bits |= std::uint32_t{bytes[4 * i + b]} << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  return Image(height, width, std::move(values));
}

// Bidirectional line transport over file descriptors: the stdio pipes of a
// child process or a connected socket.
class LineChannel {
 public:
  using Clock = std::chrono::steady_clock;

  LineChannel(int read_fd, int write_fd, pid_t child, std::string name)
      : read_fd_(read_fd), write_fd_(write_fd), child_(child), name_(std::move(name)) {}

  LineChannel(const LineChannel &) = delete;
  LineChannel &operator=(const LineChannel &) = delete;

  ~LineChannel() {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (child_ > 0) {
      ::kill(child_, SIGTERM);
      ::waitpid(child_, nullptr, 0);
    }
  }

  const std::string &name() const { return name_; }

  void write_line(std::string_view line) {
    std::string buffer(line);
    buffer.push_back('\n');
    std::size_t off = 0;
    while (off < buffer.size()) {
      const ssize_t n = child_ > 0
                            ? ::write(write_fd_, buffer.data() + off, buffer.size() - off)
                            : ::send(write_fd_, buffer.data() + off, buffer.size() - off,
                                     MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw OracleError(name_ + ": write failed: " + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  // Next complete line, or throws on EOF / deadline.
  std::string read_line(Clock::time_point deadline) {
    for (;;) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto now = Clock::now();
      if (now >= deadline) throw OracleError(name_ + ": timed out waiting for response");
      const auto wait =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
      pollfd pfd{read_fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(wait + 1, 60000)));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw OracleError(name_ + ": poll failed: " + std::strerror(errno));
      }
      if (ready == 0) continue;
      char chunk[65536];
      const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw OracleError(name_ + ": read failed: " + std::strerror(errno));
      }
      if (n == 0) throw OracleError(name_ + ": endpoint closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int read_fd_;
  int write_fd_;
  pid_t child_;
  std::string name_;
  std::string buffer_;
};

// Runs `/bin/sh -c command` with its stdin/stdout connected to the channel.
inline std::unique_ptr<LineChannel> spawn_process_channel(const std::string &command) {
  // A bridge that dies mid-write must surface as an OracleError, not SIGPIPE.
  ::signal(SIGPIPE, SIG_IGN);
  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw OracleError("pipe failed");
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw OracleError("pipe failed");
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
  std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
  char *argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(to_child[0]);
  ::close(from_child[1]);
  if (rc != 0) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    throw OracleError("cannot launch '" + command + "': " + std::strerror(rc));
  }
  return std::make_unique<LineChannel>(from_child[0], to_child[1], pid, "exec:" + command);
}

inline std::unique_ptr<LineChannel> connect_tcp_channel(const std::string &host,
                                                        const std::string &port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo *res = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw OracleError("cannot resolve " + host + ":" + port + ": " + gai_strerror(rc));
  }
  int fd = -1;
  std::string last_error = "no address";
  for (addrinfo *ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    last_error = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw OracleError("cannot connect to " + host + ":" + port + ": " + last_error);
  return std::make_unique<LineChannel>(fd, fd, 0, "tcp:" + host + ":" + port);
}

struct ExternalOracleOptions {
  std::chrono::milliseconds handshake_timeout{30000};
  std::chrono::milliseconds query_timeout{120000};
  Dims input_dims = kDefaultInputDims;
};

class ExternalOracle : public ModelOracle {
 public:
  // expected_class_count == 0 accepts whatever the handshake announces.
  ExternalOracle(std::unique_ptr<LineChannel> channel, std::size_t expected_class_count,
                 ExternalOracleOptions options = {})
      : channel_(std::move(channel)), options_(options) {
    handshake(expected_class_count);
  }

  std::size_t class_count() const override { return class_count_; }
  Dims input_dims() const override { return options_.input_dims; }
  std::string descriptor() const override { return descriptor_; }

  // Sends every request before reading any response.
  std::vector<Logits> query_pipelined(std::span<const Image> images) {
    std::vector<std::uint64_t> ids;
    ids.reserve(images.size());
    for (const Image &image : images) {
      if (!(image.dims() == input_dims())) {
        throw InvalidParameter("oracle expects " + to_string(input_dims()) + " input");
      }
      ids.push_back(send_query(image));
    }
    std::vector<Logits> out;
    out.reserve(ids.size());
    for (std::uint64_t id : ids) {
      out.push_back(await(id));
      check_response(out.back());
    }
    return out;
  }

 protected:
  Logits do_query(const Image &image) override { return await(send_query(image)); }

 private:
  void handshake(std::size_t expected) {
    channel_->write_line(R"({"op":"hello"})");
    const auto deadline = LineChannel::Clock::now() + options_.handshake_timeout;
    nlohmann::json reply;
    for (;;) {
      const std::string line = channel_->read_line(deadline);
      reply = parse(line);
      if (reply.value("op", std::string()) == "hello") break;
    }
    if (reply.contains("error")) {
      throw OracleError(channel_->name() + ": bridge failed to start: " +
                        reply["error"].dump());
    }
    if (!reply.contains("class_count") || !reply["class_count"].is_number_unsigned()) {
      throw OracleError(channel_->name() + ": hello reply lacks class_count");
    }
    class_count_ = reply["class_count"].get<std::size_t>();
    if (class_count_ < 2) throw OracleError(channel_->name() + ": class_count < 2");
    if (expected != 0 && expected != class_count_) {
      throw OracleError(channel_->name() + ": bridge reports " + std::to_string(class_count_) +
                        " classes, expected " + std::to_string(expected));
    }
    descriptor_ = channel_->name();
    if (reply.contains("model") && reply["model"].is_string()) {
      descriptor_ += " (" + reply["model"].get<std::string>() + ")";
    }
  }

  nlohmann::json parse(const std::string &line) const {
    try {
      auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw OracleError(channel_->name() + ": response is not an object");
      return j;
    } catch (const nlohmann::json::exception &e) {
      throw OracleError(channel_->name() + ": malformed response: " + e.what());
    }
  }

  std::uint64_t send_query(const Image &image) {
    const std::uint64_t id = next_id_++;
    nlohmann::json request = {{"id", id},
                              {"op", "query"},
                              {"height", image.height()},
                              {"width", image.width()},
                              {"pixels_b64", base64_encode(pack_pixels_f32le(image))}};
    channel_->write_line(request.dump());
    return id;
  }

  Logits await(std::uint64_t id) {
    const auto deadline = LineChannel::Clock::now() + options_.query_timeout;
    for (;;) {
      if (auto it = pending_.find(id); it != pending_.end()) {
        nlohmann::json reply = std::move(it->second);
        pending_.erase(it);
        return decode(id, reply);
      }
      nlohmann::json reply = parse(channel_->read_line(deadline));
      if (!reply.contains("id") || !reply["id"].is_number_unsigned()) {
        throw OracleError(channel_->name() + ": response without id");
      }
      const auto got = reply["id"].get<std::uint64_t>();
      if (got >= next_id_) {
        throw OracleError(channel_->name() + ": response for unknown id " + std::to_string(got));
      }
      pending_.emplace(got, std::move(reply));
    }
  }

  Logits decode(std::uint64_t id, const nlohmann::json &reply) const {
    if (reply.contains("error")) {
      throw OracleError(channel_->name() + ": request " + std::to_string(id) +
                        " failed: " + reply["error"].dump());
    }
    if (!reply.contains("logits") || !reply["logits"].is_array()) {
      throw OracleError(channel_->name() + ": response " + std::to_string(id) +
                        " lacks logits");
    }
    Logits logits;
    for (const auto &v : reply["logits"]) {
      if (!v.is_number()) throw OracleError(channel_->name() + ": non-numeric logit");
      logits.push_back(v.get<double>());
    }
    return logits;
  }

  std::unique_ptr<LineChannel> channel_;
  ExternalOracleOptions options_;
  std::size_t class_count_ = 0;
  std::string descriptor_;
  std::uint64_t next_id_ = 1;
  std::map<std::uint64_t, nlohmann::json> pending_;
};

// endpoint: "exec:<command>" or "tcp:<host>:<port>".
inline std::unique_ptr<ExternalOracle> connect_external_oracle(
    const std::string &endpoint, std::size_t class_count, ExternalOracleOptions options = {}) {
  if (endpoint.starts_with("exec:")) {
    return std::make_unique<ExternalOracle>(spawn_process_channel(endpoint.substr(5)),
                                            class_count, options);
  }
  if (endpoint.starts_with("tcp:")) {
    const std::string rest = endpoint.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
      throw InvalidParameter("tcp endpoint must be tcp:HOST:PORT");
    }
    return std::make_unique<ExternalOracle>(
        connect_tcp_channel(rest.substr(0, colon), rest.substr(colon + 1)), class_count,
        options);
  }
  throw InvalidParameter("unknown oracle endpoint '" + endpoint + "'");
}

}  // namespace trojanscan

#endif  // TROJANSCAN_EXTERNAL_ORACLE_HPP_
