// SPDX-License-Identifier: Apache-2.0

#include "ironstream/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>
#include <vector>

namespace ironstream {

namespace {

// payload staged for a client before its per-stream seq is assigned
struct Staged {
  wire::PacketType type;
  std::uint64_t timestamp_us;
  std::shared_ptr<const std::vector<std::uint8_t>> payload;
};

bool send_all(int fd, const std::uint8_t* data, std::size_t n) {
  std::size_t off = 0;
  while (off < n) {
    const ssize_t r = ::send(fd, data + off, n - off, MSG_NOSIGNAL);
    if (r <= 0) return false;
    off += static_cast<std::size_t>(r);
  }
  return true;
}

}  // namespace

struct StreamServer::Impl {
  AcquisitionEngine engine;
  SensorBoard sensors;
  wire::MetaPayload meta;
  ServeOptions opt;

  int listen_fd = -1;
  std::uint16_t port = 0;
  std::atomic<bool> running{false};
  std::atomic<bool> started;
  std::atomic<bool> sensors_on;
  std::atomic<bool> impedance_mode{false};

  std::thread accept_thread;
  std::thread producer_thread;

  std::mutex engine_mutex;  // guards engine + sensors + meta + stream clock
  std::uint64_t run_epoch_us = 0;

  struct Client {
    int fd = -1;
    std::thread writer;
    std::thread reader;
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<Staged> queue;
    std::uint32_t seq_by_type[7] = {};
    std::atomic<bool> alive{true};
    bool overflowed = false;
  };

  std::mutex clients_mutex;
  std::vector<std::unique_ptr<Client>> clients;

  mutable std::mutex stats_mutex;
  Stats stat;

  Impl(AcquisitionEngine e, SensorBoard s, wire::MetaPayload m, ServeOptions o)
      : engine(std::move(e)), sensors(std::move(s)), meta(std::move(m)), opt(o) {
    started = opt.autostart;
    sensors_on = opt.sensors_enabled;
  }

  // --- lifecycle -----------------------------------------------------------

  void start() {
    listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd < 0) throw IoError("serve: socket() failed");
    const int one = 1;
    ::setsockopt(listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(opt.port);
    if (::inet_pton(AF_INET, opt.host.c_str(), &addr.sin_addr) != 1)
      throw IoError("serve: bad host '" + opt.host + "'");
    if (::bind(listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      ::close(listen_fd);
      listen_fd = -1;
      throw IoError("serve: cannot bind " + opt.host + ":" + std::to_string(opt.port));
    }
    if (::listen(listen_fd, 16) != 0) {
      ::close(listen_fd);
      listen_fd = -1;
      throw IoError("serve: listen() failed");
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(listen_fd, reinterpret_cast<sockaddr*>(&bound), &len);
    port = ntohs(bound.sin_port);

    running = true;
    accept_thread = std::thread([this] { accept_loop(); });
    producer_thread = std::thread([this] { producer_loop(); });
  }

  void stop() {
    if (!running.exchange(false)) return;
    if (listen_fd >= 0) ::shutdown(listen_fd, SHUT_RDWR);
    if (accept_thread.joinable()) accept_thread.join();
    if (producer_thread.joinable()) producer_thread.join();
    std::vector<std::unique_ptr<Client>> snapshot;
    {
      std::lock_guard lock(clients_mutex);
      snapshot.swap(clients);
    }
    for (auto& c : snapshot) drop_client(*c);
    if (listen_fd >= 0) {
      ::close(listen_fd);
      listen_fd = -1;
    }
  }

  void drop_client(Client& c) {
    c.alive = false;
    c.cv.notify_all();
    if (c.fd >= 0) ::shutdown(c.fd, SHUT_RDWR);
    if (c.writer.joinable()) c.writer.join();
    if (c.reader.joinable()) c.reader.join();
    if (c.fd >= 0) {
      ::close(c.fd);
      c.fd = -1;
    }
  }

  void reap_dead_clients() {
    std::vector<std::unique_ptr<Client>> dead;
    {
      std::lock_guard lock(clients_mutex);
      for (auto it = clients.begin(); it != clients.end();) {
        if (!(*it)->alive) {
          dead.push_back(std::move(*it));
          it = clients.erase(it);
        } else {
          ++it;
        }
      }
    }
    for (auto& c : dead) drop_client(*c);
    if (!dead.empty()) {
      std::lock_guard lock(stats_mutex);
      stat.clients_active -= std::min<std::uint64_t>(stat.clients_active, dead.size());
    }
  }

  // --- client handling -----------------------------------------------------

  void accept_loop() {
    while (running) {
      pollfd pfd{listen_fd, POLLIN, 0};
      const int pr = ::poll(&pfd, 1, 100);
      if (!running) break;
      if (pr <= 0) continue;
      const int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) continue;
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

      auto client = std::make_unique<Client>();
      client->fd = fd;
      Client* c = client.get();
      c->writer = std::thread([this, c] { writer_loop(*c); });
      c->reader = std::thread([this, c] { reader_loop(*c); });
      {
        std::lock_guard lock(clients_mutex);
        clients.push_back(std::move(client));
      }
      {
        std::lock_guard lock(stats_mutex);
        ++stat.clients_accepted;
        ++stat.clients_active;
      }
      // greet with the current stream configuration
      std::lock_guard lock(engine_mutex);
      enqueue(*c, wire::PacketType::meta, now_stream_us(), make_meta_payload());
    }
  }

  std::shared_ptr<const std::vector<std::uint8_t>> make_meta_payload() {
    return std::make_shared<const std::vector<std::uint8_t>>(meta.pack());
  }

  std::uint64_t now_stream_us() {
    return run_epoch_us + engine.frames_produced() * 1000000ULL /
                              static_cast<std::uint64_t>(engine.config().rate);
  }

  bool enqueue(Client& c, wire::PacketType type, std::uint64_t ts,
               std::shared_ptr<const std::vector<std::uint8_t>> payload) {
    if (!c.alive) return false;
    {
      std::lock_guard lock(c.mutex);
      if (c.queue.size() >= opt.client_queue_packets) {
        c.overflowed = true;
      } else {
        c.queue.push_back({type, ts, std::move(payload)});
      }
    }
    if (c.overflowed) {
      overflow_disconnect(c);
      return false;
    }
    c.cv.notify_one();
    return true;
  }

  void overflow_disconnect(Client& c) {
    if (!c.alive.exchange(false)) return;
    // final error packet is best effort: the pipe is already full
    wire::Packet p;
    p.type = wire::PacketType::error;
    p.seq = 0;
    p.timestamp_us = 0;
    p.payload = wire::ErrorPayload{wire::error_code::overflow_disconnect,
                                   "client queue overflow; disconnected"}
                    .pack();
    const auto bytes = wire::encode(p);
    ::send(c.fd, bytes.data(), bytes.size(), MSG_NOSIGNAL | MSG_DONTWAIT);
    ::shutdown(c.fd, SHUT_RDWR);
    c.cv.notify_all();
    std::lock_guard lock(stats_mutex);
    ++stat.overflow_disconnects;
  }

  void writer_loop(Client& c) {
    while (true) {
      Staged item;
      {
        std::unique_lock lock(c.mutex);
        c.cv.wait(lock, [&] { return !c.alive || !c.queue.empty(); });
        if (!c.alive) return;
        item = std::move(c.queue.front());
        c.queue.pop_front();
      }
      wire::Packet p;
      p.type = item.type;
      const auto ti = static_cast<std::size_t>(item.type) - 1;
      p.seq = c.seq_by_type[ti]++;
      p.timestamp_us = item.timestamp_us;
      p.payload = *item.payload;
      const auto bytes = wire::encode(p);
      if (!send_all(c.fd, bytes.data(), bytes.size())) {
        c.alive = false;
        return;
      }
    }
  }

  void reader_loop(Client& c) {
    std::vector<std::uint8_t> buf;
    std::uint8_t chunk[1024];
    while (c.alive) {
      pollfd pfd{c.fd, POLLIN, 0};
      const int pr = ::poll(&pfd, 1, 100);
      if (!c.alive || !running) break;
      if (pr <= 0) continue;
      const ssize_t r = ::recv(c.fd, chunk, sizeof(chunk), 0);
      if (r <= 0) {
        c.alive = false;
        c.cv.notify_all();
        break;
      }
      buf.insert(buf.end(), chunk, chunk + r);
      std::size_t pos = 0;
      while (pos < buf.size()) {
        const auto res = wire::decode({buf.data() + pos, buf.size() - pos});
        if (res.status == wire::DecodeStatus::incomplete) break;
        if (res.status == wire::DecodeStatus::ok &&
            res.packet.type == wire::PacketType::command) {
          handle_command(c, res.packet);
        }
        pos += std::max<std::size_t>(res.consumed, 1);
      }
      buf.erase(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(pos));
    }
  }

  void send_error(Client& c, std::uint8_t code, const std::string& reason) {
    auto payload =
        std::make_shared<const std::vector<std::uint8_t>>(wire::ErrorPayload{code, reason}.pack());
    enqueue(c, wire::PacketType::error, 0, std::move(payload));
  }

  void broadcast_meta() {
    auto payload = make_meta_payload();
    std::lock_guard lock(clients_mutex);
    for (auto& c : clients)
      if (c->alive) enqueue(*c, wire::PacketType::meta, run_epoch_us, payload);
  }

  void refresh_meta_locked() {
    meta.kv["rate"] = std::to_string(engine.config().rate);
    meta.kv["gain"] = std::to_string(engine.config().gain);
    meta.kv["impedance_mode"] = impedance_mode ? "1" : "0";
  }

  void handle_command(Client& c, const wire::Packet& p) {
    wire::CommandPayload cmd;
    try {
      cmd = wire::CommandPayload::parse(p.payload);
    } catch (const CodecError& e) {
      send_error(c, wire::error_code::bad_command, e.what());
      return;
    }

    bool config_changed = false;
    {
      std::lock_guard lock(engine_mutex);
      switch (cmd.opcode) {
        case wire::Opcode::start:
          started = true;
          break;
        case wire::Opcode::stop:
          started = false;
          break;
        case wire::Opcode::set_rate: {
          const int rate = static_cast<int>(cmd.arg);
          if (rate != 250 && rate != 500 && rate != 1000) {
            send_error(c, wire::error_code::bad_argument,
                       "SET_RATE arg must be one of {250, 500, 1000}");
            return;
          }
          run_epoch_us = now_stream_us();
          engine.set_rate(rate);
          config_changed = true;
          break;
        }
        case wire::Opcode::set_gain: {
          const int gain = static_cast<int>(cmd.arg);
          static const int menu[] = {1, 2, 4, 6, 8, 12, 24};
          bool ok = false;
          for (int g : menu) ok = ok || g == gain;
          if (!ok) {
            send_error(c, wire::error_code::bad_argument,
                       "SET_GAIN arg must be one of {1,2,4,6,8,12,24}");
            return;
          }
          run_epoch_us = now_stream_us();
          engine.set_gain(gain);
          config_changed = true;
          break;
        }
        case wire::Opcode::impedance_mode: {
          const bool on = cmd.arg != 0;
          run_epoch_us = now_stream_us();
          impedance_mode = on;
          // identical excitation everywhere is common-mode: bias loop off
          engine.set_lead_off_enabled(on);
          engine.set_bias_enabled(on ? false : engine.chain().bias.enabled);
          config_changed = true;
          break;
        }
        case wire::Opcode::sensors_on:
          sensors_on = true;
          break;
        case wire::Opcode::sensors_off:
          sensors_on = false;
          break;
      }
      if (config_changed) refresh_meta_locked();
    }

    auto ack = std::make_shared<const std::vector<std::uint8_t>>(
        wire::AckPayload{cmd.opcode, cmd.arg}.pack());
    enqueue(c, wire::PacketType::ack, 0, std::move(ack));
    if (config_changed) broadcast_meta();
  }

  // --- producer ------------------------------------------------------------

  void broadcast(wire::PacketType type, std::uint64_t ts,
                 std::shared_ptr<const std::vector<std::uint8_t>> payload) {
    std::lock_guard lock(clients_mutex);
    for (auto& c : clients)
      if (c->alive) enqueue(*c, type, ts, payload);
  }

  void producer_loop() {
    using clock = std::chrono::steady_clock;
    auto wall_anchor = clock::now();
    std::uint64_t anchor_stream_us = 0;
    bool was_started = false;
    double next_env_t = 0.0, next_imu_t = 0.0;

    while (running) {
      if (!started) {
        was_started = false;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        reap_dead_clients();
        continue;
      }

      std::vector<SampleFrame> frames;
      std::uint64_t chunk_start_us = 0;
      std::vector<std::pair<std::uint64_t, std::shared_ptr<const std::vector<std::uint8_t>>>>
          sensor_out;
      {
        std::lock_guard lock(engine_mutex);
        if (!was_started) {
          wall_anchor = clock::now();
          anchor_stream_us = now_stream_us();
          was_started = true;
          const double t0 = static_cast<double>(now_stream_us()) * 1e-6;
          next_env_t = t0;
          next_imu_t = t0;
        }
        chunk_start_us = now_stream_us();
        frames = engine.acquire(opt.frames_per_packet);

        if (sensors_on) {
          const double chunk_end_t = static_cast<double>(now_stream_us()) * 1e-6;
          while (next_env_t < chunk_end_t || next_imu_t < chunk_end_t) {
            if (next_env_t <= next_imu_t && next_env_t < chunk_end_t) {
              SensorFrame f = sensors.poll(next_env_t);
              sensor_out.emplace_back(
                  static_cast<std::uint64_t>(next_env_t * 1e6),
                  std::make_shared<const std::vector<std::uint8_t>>(
                      wire::SensorPayload{f}.pack()));
              next_env_t += 1.0 / opt.env_poll_hz;
            } else if (next_imu_t < chunk_end_t) {
              SensorFrame f = sensors.poll(next_imu_t);
              f.validity &= SensorFrame::kAccel | SensorFrame::kGyro;
              sensor_out.emplace_back(
                  static_cast<std::uint64_t>(next_imu_t * 1e6),
                  std::make_shared<const std::vector<std::uint8_t>>(
                      wire::SensorPayload{f}.pack()));
              next_imu_t += 1.0 / opt.imu_poll_hz;
            }
          }
        }
      }

      // data packet for this chunk
      if (!frames.empty()) {
        wire::DataPayload d;
        d.channel_count = static_cast<std::uint8_t>(frames.front().codes.size());
        d.frames_in_packet = static_cast<std::uint8_t>(frames.size());
        for (const auto& f : frames) {
          d.status.push_back(f.status & 0xFFFFFF);
          for (auto code : f.codes) d.codes.push_back(code);
        }
        auto payload = std::make_shared<const std::vector<std::uint8_t>>(d.pack());
        broadcast(wire::PacketType::data, chunk_start_us, payload);
        std::lock_guard lock(stats_mutex);
        ++stat.data_packets;
      }
      for (auto& [ts, payload] : sensor_out) {
        broadcast(wire::PacketType::sensor, ts, payload);
        std::lock_guard lock(stats_mutex);
        ++stat.sensor_packets;
      }

      reap_dead_clients();

      if (!opt.fast) {
        std::uint64_t target_us;
        {
          std::lock_guard lock(engine_mutex);
          target_us = now_stream_us();
        }
        const auto deadline =
            wall_anchor + std::chrono::microseconds(target_us - anchor_stream_us);
        std::this_thread::sleep_until(deadline);
      }
    }
  }
};

StreamServer::StreamServer(AcquisitionEngine engine, SensorBoard sensors, wire::MetaPayload meta,
                           ServeOptions options)
    : impl_(std::make_unique<Impl>(std::move(engine), std::move(sensors), std::move(meta),
                                   std::move(options))) {}

StreamServer::~StreamServer() {
  if (impl_) impl_->stop();
}

void StreamServer::start() { impl_->start(); }
void StreamServer::stop() { impl_->stop(); }
std::uint16_t StreamServer::bound_port() const { return impl_->port; }

StreamServer::Stats StreamServer::stats() const {
  std::lock_guard lock(impl_->stats_mutex);
  return impl_->stat;
}

// --- WireClient -------------------------------------------------------------

WireClient::WireClient(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw IoError("client: socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw IoError("client: bad host '" + host + "'");
  }
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd_);
    throw IoError("client: cannot connect to " + host + ":" + std::to_string(port));
  }
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

WireClient::~WireClient() { close(); }

void WireClient::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void WireClient::send_command(wire::Opcode op, std::uint32_t arg) {
  wire::Packet p;
  p.type = wire::PacketType::command;
  p.seq = 0;
  p.timestamp_us = 0;
  p.payload = wire::CommandPayload{op, arg}.pack();
  const auto bytes = wire::encode(p);
  if (!send_all(fd_, bytes.data(), bytes.size())) throw IoError("client: send failed");
}

std::optional<wire::Packet> WireClient::read_packet(int timeout_ms,
                                                    std::vector<std::uint8_t>* raw_sink) {
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (true) {
    const auto res = wire::decode({buffer_.data(), buffer_.size()});
    if (res.status == wire::DecodeStatus::ok) {
      if (raw_sink)
        raw_sink->insert(raw_sink->end(), buffer_.begin(),
                         buffer_.begin() + static_cast<std::ptrdiff_t>(res.consumed));
      buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(res.consumed));
      return res.packet;
    }
    if (res.status != wire::DecodeStatus::incomplete) {
      // desynchronized stream: drop the offending bytes and resync
      buffer_.erase(buffer_.begin(),
                    buffer_.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(
                                          res.consumed, 1)));
      continue;
    }
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) return std::nullopt;
    const auto remain =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    pollfd pfd{fd_, POLLIN, 0};
    const int pr = ::poll(&pfd, 1, static_cast<int>(std::max<long long>(1, remain)));
    if (pr <= 0) {
      if (pr == 0) continue;
      return std::nullopt;
    }
    std::uint8_t chunk[4096];
    const ssize_t r = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (r <= 0) return std::nullopt;
    buffer_.insert(buffer_.end(), chunk, chunk + r);
  }
}

}  // namespace ironstream
