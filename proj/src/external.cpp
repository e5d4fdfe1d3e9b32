// Client side of the newline-delimited JSON model protocol.
//
//   server -> {"num_classes": K, "input_shape": [H, W, C]}     (once)
//   client -> {"id": n, "shape": [H, W, C], "pixels": [...]}
//   server -> {"id": n, "probs": [...]}  or  {"id": n, "error": "..."}

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "proa/classifier.hpp"
#include "proa/errors.hpp"

namespace proa {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

/// Peer closed the stream or a syscall failed; retried by the caller.
struct ConnectionLost : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sys_error(const std::string& what) { return what + ": " + std::strerror(errno); }

std::string quote(const std::string& line) {
  constexpr std::size_t kMax = 200;
  return "'" + (line.size() > kMax ? line.substr(0, kMax) + "..." : line) + "'";
}

class LineChannel {
 public:
  static std::unique_ptr<LineChannel> open(const std::string& address);

  ~LineChannel() {
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (child_ > 0) {
      ::kill(child_, SIGTERM);
      ::waitpid(child_, nullptr, 0);
    }
  }

  void write_all(const std::string& data) {
    std::size_t done = 0;
    while (done < data.size()) {
      const ssize_t n = is_socket_ ? ::send(write_fd_, data.data() + done, data.size() - done, MSG_NOSIGNAL)
                                   : ::write(write_fd_, data.data() + done, data.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ConnectionLost(sys_error("write to model failed"));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(Clock::time_point deadline) {
    while (true) {
      if (const auto pos = buffer_.find('\n'); pos != std::string::npos) {
        std::string line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (left.count() <= 0) throw TimeoutError("model did not answer before the deadline");
      pollfd pfd{read_fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw ConnectionLost(sys_error("poll failed"));
      }
      if (ready == 0) throw TimeoutError("model did not answer before the deadline");
      char chunk[65536];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ConnectionLost(sys_error("read from model failed"));
      }
      if (n == 0) throw ConnectionLost("model closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int read_fd_ = -1;
  int write_fd_ = -1;
  bool is_socket_ = false;
  pid_t child_ = -1;
  std::string buffer_;

  static std::unique_ptr<LineChannel> connect_tcp(const std::string& hostport);
  static std::unique_ptr<LineChannel> spawn(const std::string& command);
};

std::unique_ptr<LineChannel> LineChannel::open(const std::string& address) {
  static std::once_flag ignore_sigpipe;
  std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });
  if (address.rfind("tcp://", 0) == 0) return connect_tcp(address.substr(6));
  if (address.rfind("stdio:", 0) == 0) return spawn(address.substr(6));
  throw ConfigError("unsupported model address " + quote(address) +
                    " (expected tcp://host:port or stdio:<command>)");
}

std::unique_ptr<LineChannel> LineChannel::connect_tcp(const std::string& hostport) {
  const auto colon = hostport.rfind(':');
  if (colon == std::string::npos) throw ConfigError("tcp address needs host:port, got " + quote(hostport));
  const std::string host = hostport.substr(0, colon);
  const std::string port = hostport.substr(colon + 1);

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0) {
    throw ConnectionLost("cannot resolve " + hostport + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw ConnectionLost(sys_error("cannot connect to " + hostport));

  auto ch = std::make_unique<LineChannel>();
  ch->read_fd_ = ch->write_fd_ = fd;
  ch->is_socket_ = true;
  return ch;
}

std::unique_ptr<LineChannel> LineChannel::spawn(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw ConnectionLost(sys_error("pipe"));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ConnectionLost(sys_error("pipe"));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw ConnectionLost(sys_error("fork"));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  auto ch = std::make_unique<LineChannel>();
  ch->read_fd_ = from_child[0];
  ch->write_fd_ = to_child[1];
  ch->child_ = pid;
  return ch;
}

json parse_frame(const std::string& line) {
  try {
    auto j = json::parse(line);
    if (!j.is_object()) throw ProtocolError("frame is not a JSON object: " + quote(line));
    return j;
  } catch (const json::parse_error&) {
    throw ProtocolError("unparseable frame from model: " + quote(line));
  }
}

}  // namespace

struct ExternalClassifier::State {
  std::string address;
  ExternalOptions options;
  std::mutex mu;
  std::unique_ptr<LineChannel> channel;
  std::size_t num_classes = 0;
  Shape shape;
  std::uint64_t next_id = 1;

  void handshake(LineChannel& ch) {
    const auto line = ch.read_line(Clock::now() + options.timeout);
    const json j = parse_frame(line);
    try {
      const auto k = j.at("num_classes").get<std::size_t>();
      const auto dims = j.at("input_shape").get<std::vector<std::size_t>>();
      if (dims.size() != 3) throw ProtocolError("handshake input_shape must have 3 entries: " + quote(line));
      const Shape s{dims[0], dims[1], dims[2]};
      if (k < 2 || s.size() == 0 || (s.channels != 1 && s.channels != 3)) {
        throw ProtocolError("handshake declares an unusable model: " + quote(line));
      }
      if (num_classes != 0 && (k != num_classes || s != shape)) {
        throw ProtocolError("model changed its signature on reconnect: " + quote(line));
      }
      num_classes = k;
      shape = s;
    } catch (const json::exception&) {
      throw ProtocolError("malformed handshake: " + quote(line));
    }
  }

  // Caller holds `mu`. Retries the connection only; protocol errors surface.
  void ensure_connected(int& attempts) {
    while (!channel) {
      ++attempts;
      try {
        auto ch = LineChannel::open(address);
        handshake(*ch);
        channel = std::move(ch);
      } catch (const ConnectionLost& e) {
        if (attempts >= options.max_attempts) throw TransportError(e.what(), attempts);
      }
    }
  }

  std::vector<ProbVector> exchange(std::span<const ImageTensor> images) {
    const auto deadline = Clock::now() + options.timeout;
    std::unordered_map<std::uint64_t, std::size_t> pending;
    std::string payload;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const std::uint64_t id = next_id++;
      pending.emplace(id, i);
      json req;
      req["id"] = id;
      req["shape"] = {shape.height, shape.width, shape.channels};
      auto& px = req["pixels"] = json::array();
      for (double v : images[i].data()) px.push_back(static_cast<float>(v));
      payload += req.dump();
      payload += '\n';
    }
    channel->write_all(payload);

    std::vector<ProbVector> out(images.size());
    while (!pending.empty()) {
      const auto line = channel->read_line(deadline);
      if (line.empty()) continue;
      const json j = parse_frame(line);
      std::uint64_t id;
      try {
        id = j.at("id").get<std::uint64_t>();
      } catch (const json::exception&) {
        throw ProtocolError("response without a valid id: " + quote(line));
      }
      const auto it = pending.find(id);
      if (it == pending.end()) throw ProtocolError("response for unknown id: " + quote(line));
      if (j.contains("error")) {
        throw ProtocolError("model rejected request " + std::to_string(id) + ": " +
                            (j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump()));
      }
      ProbVector probs;
      try {
        probs = j.at("probs").get<std::vector<double>>();
      } catch (const json::exception&) {
        throw ProtocolError("response without numeric probs: " + quote(line));
      }
      check_simplex(probs, num_classes);
      out[it->second] = std::move(probs);
      pending.erase(it);
    }
    return out;
  }
};

ExternalClassifier::ExternalClassifier(std::string address, ExternalOptions options)
    : state_(std::make_unique<State>()) {
  state_->address = std::move(address);
  state_->options = options;
  if (state_->options.max_attempts < 1) state_->options.max_attempts = 1;
  std::lock_guard lock(state_->mu);
  int attempts = 0;
  state_->ensure_connected(attempts);
}

ExternalClassifier::~ExternalClassifier() = default;

std::size_t ExternalClassifier::num_classes() const { return state_->num_classes; }
Shape ExternalClassifier::input_shape() const { return state_->shape; }
const std::string& ExternalClassifier::address() const noexcept { return state_->address; }

std::vector<ProbVector> ExternalClassifier::predict_batch(std::span<const ImageTensor> images) const {
  check_inputs(images);
  if (images.empty()) return {};
  std::lock_guard lock(state_->mu);
  // A live connection counts as the first attempt.
  int attempts = state_->channel ? 1 : 0;
  while (true) {
    state_->ensure_connected(attempts);
    try {
      return state_->exchange(images);
    } catch (const ConnectionLost& e) {
      state_->channel.reset();
      if (attempts >= state_->options.max_attempts) throw TransportError(e.what(), attempts);
    } catch (...) {
      // Late frames from an abandoned batch must never reach the next one.
      state_->channel.reset();
      throw;
    }
  }
}

std::vector<ProbVector> external_predict(const std::string& address,
                                         std::span<const ImageTensor> images,
                                         ExternalOptions options) {
  return ExternalClassifier(address, options).predict_batch(images);
}

}  // namespace proa
