/**
 * Copyright 2026 The dagpool Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dagpool/transport.hpp"

#include <spdlog/spdlog.h>

#include <cstring>

namespace dagpool {

using asio::ip::tcp;

std::pair<std::string, uint16_t> split_address(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon + 1 == addr.size()) throw std::invalid_argument("bad address: " + addr);
  unsigned long port = std::stoul(addr.substr(colon + 1));
  if (port > 65535) throw std::invalid_argument("bad port: " + addr);
  return {addr.substr(0, colon), static_cast<uint16_t>(port)};
}

Bytes frame(std::span<const uint8_t> body) {
  Bytes out(4 + body.size());
  auto n = static_cast<uint32_t>(body.size());
  for (int i = 0; i < 4; ++i) out[i] = static_cast<uint8_t>(n >> (8 * i));
  if (!body.empty()) std::memcpy(out.data() + 4, body.data(), body.size());
  return out;
}

// ---------------------------------------------------------------------------

class Transport::Channel : public std::enable_shared_from_this<Channel> {
 public:
  Channel(Transport& t, std::string addr) : t_(t), addr_(std::move(addr)), socket_(t.io_), timer_(t.io_) {
    backoff_ = t_.config_.backoff_min_us;
  }

  bool push(std::shared_ptr<const Bytes> f, Round cancel) {
    const auto& cfg = t_.config_;
    while (!queue_.empty() && (queue_.size() + 1 > cfg.max_queue_msgs || bytes_ + f->size() > cfg.max_queue_bytes)) {
      if (!evict_oldest()) {
        ++t_.stats_.rejected;
        return false;
      }
    }
    bytes_ += f->size();
    queue_.push_back({std::move(f), cancel});
    if (state_ == State::kIdle) connect();
    else if (state_ == State::kConnected) pump();
    return true;
  }

  void evict_below(Round r) {
    size_t start = writing_ ? 1 : 0;
    for (size_t i = start; i < queue_.size();) {
      if (queue_[i].cancel != kNeverCancel && queue_[i].cancel < r) {
        bytes_ -= queue_[i].frame->size();
        queue_.erase(queue_.begin() + static_cast<long>(i));
        ++t_.stats_.evicted;
      } else {
        ++i;
      }
    }
  }

  void close() {
    closed_ = true;
    boost::system::error_code ec;
    socket_.close(ec);
    timer_.cancel();
  }

  size_t size() const { return queue_.size(); }
  size_t bytes() const { return bytes_; }
  bool connected() const { return state_ == State::kConnected; }

 private:
  enum class State { kIdle, kConnecting, kConnected, kBackoff };
  struct Pending {
    std::shared_ptr<const Bytes> frame;
    Round cancel;
  };

  bool evict_oldest() {
    size_t start = writing_ ? 1 : 0;
    for (size_t i = start; i < queue_.size(); ++i) {
      if (queue_[i].cancel == kNeverCancel) continue;
      bytes_ -= queue_[i].frame->size();
      queue_.erase(queue_.begin() + static_cast<long>(i));
      ++t_.stats_.evicted;
      return true;
    }
    return false;
  }

  void connect() {
    if (closed_) return;
    state_ = State::kConnecting;
    auto [host, port] = split_address(addr_);
    boost::system::error_code ec;
    auto ip = asio::ip::make_address(host == "localhost" ? "127.0.0.1" : host, ec);
    if (ec) {
      spdlog::error("unresolvable peer {}", addr_);
      retry();
      return;
    }
    socket_ = tcp::socket(t_.io_);
    socket_.async_connect(tcp::endpoint(ip, port), [self = shared_from_this()](const boost::system::error_code& e) {
      if (self->closed_) return;
      if (e) {
        self->retry();
        return;
      }
      boost::system::error_code ignore;
      self->socket_.set_option(tcp::no_delay(true), ignore);
      self->state_ = State::kConnected;
      self->backoff_ = self->t_.config_.backoff_min_us;
      ++self->t_.stats_.connects;
      spdlog::debug("connected to {}", self->addr_);
      self->watch();
      self->pump();
    });
  }

  // Peers never write back; any read completion means the stream is gone.
  void watch() {
    socket_.async_read_some(asio::buffer(sink_), [self = shared_from_this()](const boost::system::error_code& e, size_t) {
      if (self->closed_ || self->state_ != State::kConnected) return;
      if (!e) {
        self->watch();
        return;
      }
      ++self->t_.stats_.disconnects;
      boost::system::error_code ignore;
      self->socket_.close(ignore);
      self->state_ = State::kBackoff;
      if (!self->writing_) self->retry();
    });
  }

  void retry() {
    state_ = State::kBackoff;
    std::uniform_int_distribution<TimeUs> jitter(0, backoff_ / 2);
    TimeUs wait = backoff_ / 2 + jitter(t_.rng_);
    backoff_ = std::min(backoff_ * 2, t_.config_.backoff_max_us);
    timer_.expires_after(std::chrono::microseconds(wait));
    timer_.async_wait([self = shared_from_this()](const boost::system::error_code& e) {
      if (e || self->closed_) return;
      self->connect();
    });
  }

  void pump() {
    if (writing_ || queue_.empty() || state_ != State::kConnected) return;
    writing_ = true;
    auto f = queue_.front().frame;
    asio::async_write(socket_, asio::buffer(*f),
                      [self = shared_from_this(), f](const boost::system::error_code& e, size_t) {
                        self->writing_ = false;
                        if (self->closed_) return;
                        if (e || self->state_ != State::kConnected) {
                          // The frame stays queued and goes out again after reconnecting.
                          boost::system::error_code ignore;
                          self->socket_.close(ignore);
                          if (self->state_ == State::kConnected) {
                            ++self->t_.stats_.disconnects;
                            self->state_ = State::kBackoff;
                          }
                          self->retry();
                          return;
                        }
                        ++self->t_.stats_.frames_sent;
                        self->t_.stats_.bytes_sent += f->size();
                        self->bytes_ -= f->size();
                        self->queue_.pop_front();
                        self->pump();
                      });
  }

  Transport& t_;
  std::string addr_;
  tcp::socket socket_;
  asio::steady_timer timer_;
  std::deque<Pending> queue_;
  std::array<uint8_t, 64> sink_{};
  size_t bytes_ = 0;
  State state_ = State::kIdle;
  bool writing_ = false;
  bool closed_ = false;
  TimeUs backoff_;
};

// ---------------------------------------------------------------------------

class Transport::Session : public std::enable_shared_from_this<Session> {
 public:
  Session(Transport& t, tcp::socket s, FrameHandler h) : t_(t), socket_(std::move(s)), handler_(std::move(h)) {}

  void start() { read_header(); }
  void close() {
    boost::system::error_code ec;
    socket_.close(ec);
  }

 private:
  void read_header() {
    asio::async_read(socket_, asio::buffer(len_), [self = shared_from_this()](const boost::system::error_code& e, size_t) {
      if (e) return;
      uint32_t n = 0;
      for (int i = 0; i < 4; ++i) n |= static_cast<uint32_t>(self->len_[i]) << (8 * i);
      if (n > self->t_.config_.max_frame_bytes) {
        ++self->t_.stats_.bad_frames;
        self->close();
        return;
      }
      self->body_.resize(n);
      self->read_body();
    });
  }

  void read_body() {
    asio::async_read(socket_, asio::buffer(body_), [self = shared_from_this()](const boost::system::error_code& e, size_t) {
      if (e) return;
      ++self->t_.stats_.frames_received;
      self->handler_(std::move(self->body_));
      self->body_ = Bytes{};
      self->read_header();
    });
  }

  Transport& t_;
  tcp::socket socket_;
  FrameHandler handler_;
  std::array<uint8_t, 4> len_{};
  Bytes body_;
};

class Transport::Listener : public std::enable_shared_from_this<Listener> {
 public:
  Listener(Transport& t, const tcp::endpoint& ep, FrameHandler h) : t_(t), acceptor_(t.io_), handler_(std::move(h)) {
    acceptor_.open(ep.protocol());
    acceptor_.set_option(tcp::acceptor::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
  }

  uint16_t port() const { return acceptor_.local_endpoint().port(); }

  void accept() {
    acceptor_.async_accept([self = shared_from_this()](const boost::system::error_code& e, tcp::socket s) {
      if (e) return;
      boost::system::error_code ignore;
      s.set_option(tcp::no_delay(true), ignore);
      auto session = std::make_shared<Session>(self->t_, std::move(s), self->handler_);
      self->sessions_.push_back(session);
      session->start();
      self->accept();
    });
  }

  void close() {
    boost::system::error_code ec;
    acceptor_.close(ec);
    for (auto& w : sessions_) {
      if (auto s = w.lock()) s->close();
    }
  }

 private:
  Transport& t_;
  tcp::acceptor acceptor_;
  FrameHandler handler_;
  std::vector<std::weak_ptr<Session>> sessions_;
};

// ---------------------------------------------------------------------------

Transport::Transport(asio::io_context& io, TransportConfig config, uint64_t seed)
    : io_(io), config_(config), rng_(seed) {}

Transport::~Transport() { close(); }

uint16_t Transport::listen(const std::string& addr, MessageHandler handler) {
  return listen_frames(addr, [this, h = std::move(handler)](Bytes body) {
    MessagePtr msg;
    try {
      msg = std::make_shared<const Message>(decode_message(body));
    } catch (const std::exception& e) {
      ++stats_.bad_frames;
      spdlog::warn("undecodable frame: {}", e.what());
      return;
    }
    h(std::move(msg));
  });
}

uint16_t Transport::listen_frames(const std::string& addr, FrameHandler handler) {
  auto [host, port] = split_address(addr);
  auto ip = asio::ip::make_address(host == "localhost" ? "127.0.0.1" : host);
  auto l = std::make_shared<Listener>(*this, tcp::endpoint(ip, port), std::move(handler));
  l->accept();
  listeners_.push_back(l);
  return l->port();
}

Transport::Channel& Transport::channel(const std::string& addr) {
  auto& c = channels_[addr];
  if (!c) c = std::make_shared<Channel>(*this, addr);
  return *c;
}

bool Transport::send(const std::string& addr, const MessagePtr& msg, Round cancel_round) {
  return send_bytes(addr, encode_message(*msg), cancel_round);
}

bool Transport::send_bytes(const std::string& addr, Bytes body, Round cancel_round) {
  if (cancel_round != kNeverCancel && cancel_round < round_) {
    ++stats_.evicted;
    return true;
  }
  return channel(addr).push(std::make_shared<const Bytes>(frame(body)), cancel_round);
}

void Transport::set_round(Round round) {
  if (round <= round_) return;
  round_ = round;
  for (auto& [a, c] : channels_) c->evict_below(round);
}

void Transport::close() {
  for (auto& l : listeners_) l->close();
  listeners_.clear();
  for (auto& [a, c] : channels_) c->close();
}

size_t Transport::queued(const std::string& addr) const {
  auto it = channels_.find(addr);
  return it == channels_.end() ? 0 : it->second->size();
}

size_t Transport::queued_bytes(const std::string& addr) const {
  auto it = channels_.find(addr);
  return it == channels_.end() ? 0 : it->second->bytes();
}

bool Transport::connected(const std::string& addr) const {
  auto it = channels_.find(addr);
  return it != channels_.end() && it->second->connected();
}

}  // namespace dagpool
