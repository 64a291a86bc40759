// SPDX-License-Identifier: Apache-2.0
#pragma once

// TCP streaming: one producer (the acquisition engine) fanned out to N
// clients over bounded per-client queues. Commands from any client apply to
// the shared acquisition, last writer wins; every accepted command is ack'd
// to its sender and config changes are broadcast as meta packets. A client
// whose queue overflows is disconnected (best-effort error packet 0x05) and
// never stalls the producer or its peers.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ironstream/pipeline.hpp"
#include "ironstream/sensors.hpp"
#include "ironstream/wire.hpp"

namespace ironstream {

struct ServeOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 9350;  // 0 = ephemeral (see bound_port())
  bool fast = false;          // stream as fast as possible instead of real time
  std::size_t client_queue_packets = 256;
  std::size_t frames_per_packet = 10;
  double env_poll_hz = 1.0;   // environment sensors
  double imu_poll_hz = 50.0;  // accel/gyro
  bool sensors_enabled = true;
  bool autostart = false;     // produce without waiting for START
};

class StreamServer {
 public:
  StreamServer(AcquisitionEngine engine, SensorBoard sensors, wire::MetaPayload meta,
               ServeOptions options);
  ~StreamServer();
  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;

  void start();  // throws IoError on bind failure
  void stop();

  std::uint16_t bound_port() const;

  struct Stats {
    std::uint64_t clients_accepted = 0;
    std::uint64_t clients_active = 0;
    std::uint64_t overflow_disconnects = 0;
    std::uint64_t data_packets = 0;
    std::uint64_t sensor_packets = 0;
  };
  Stats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Minimal blocking client used by the record subcommand and the tests.
class WireClient {
 public:
  WireClient(const std::string& host, std::uint16_t port);  // throws IoError
  ~WireClient();
  WireClient(const WireClient&) = delete;
  WireClient& operator=(const WireClient&) = delete;

  void send_command(wire::Opcode op, std::uint32_t arg = 0);
  /// Next decoded packet, or nullopt on timeout/close. Raw bytes of each
  /// returned packet are appended to *raw_sink when provided.
  std::optional<wire::Packet> read_packet(int timeout_ms,
                                          std::vector<std::uint8_t>* raw_sink = nullptr);
  void close();

 private:
  int fd_ = -1;
  std::vector<std::uint8_t> buffer_;
};

}  // namespace ironstream
