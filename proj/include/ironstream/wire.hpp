// SPDX-License-Identifier: Apache-2.0
#pragma once

// Binary streaming protocol (frozen at version 0x01; byte-exact layout in
// docs/protocol.md):
//
//   header (20 bytes, little-endian):
//     magic "IBCI" | version u8 | ptype u8 | seq u32 | timestamp_us u64 |
//     payload_len u16 (<= 4096)
//   payload (payload_len bytes)
//   trailer: crc16 u16 LE, CRC-16/CCITT-FALSE over header+payload
//
// Sample codes travel as 3-byte big-endian two's complement (the converter's
// natural byte order); everything else is little-endian.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ironstream/ads1299.hpp"
#include "ironstream/errors.hpp"
#include "ironstream/sensors.hpp"

namespace ironstream::wire {

constexpr std::size_t kHeaderSize = 20;
constexpr std::size_t kTrailerSize = 2;
constexpr std::size_t kMaxPayload = 4096;
constexpr std::uint8_t kVersion = 0x01;
constexpr char kMagic[4] = {'I', 'B', 'C', 'I'};

enum class PacketType : std::uint8_t {
  data = 0x01,
  sensor = 0x02,
  command = 0x03,
  ack = 0x04,
  error = 0x05,
  meta = 0x06,
};

enum class Opcode : std::uint8_t {
  start = 0x01,
  stop = 0x02,
  set_rate = 0x03,
  set_gain = 0x04,
  impedance_mode = 0x05,
  sensors_on = 0x06,
  sensors_off = 0x07,
};

const char* to_string(PacketType t);
const char* to_string(Opcode o);

struct Packet {
  PacketType type = PacketType::data;
  std::uint32_t seq = 0;
  std::uint64_t timestamp_us = 0;
  std::vector<std::uint8_t> payload;

  bool operator==(const Packet&) const = default;
};

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xorout.
/// check("123456789") = 0x29B1.
std::uint16_t crc16(std::span<const std::uint8_t> bytes);

/// Serializes a packet; throws CodecError when payload exceeds kMaxPayload.
std::vector<std::uint8_t> encode(const Packet& p);

enum class DecodeStatus {
  ok,
  incomplete,        // short read; resumable, nothing consumed
  not_our_protocol,  // magic mismatch
  bad_version,
  bad_length,        // payload_len exceeds the maximum
  corruption,        // CRC mismatch
};

const char* to_string(DecodeStatus s);

struct DecodeResult {
  DecodeStatus status = DecodeStatus::incomplete;
  Packet packet;
  std::size_t consumed = 0;  // bytes to drop from the stream buffer
  std::size_t needed = 0;    // for incomplete: minimum additional bytes
};

/// Validates magic, version, length and CRC in that order; reports the first
/// failure. Never throws, crashes or over-reads on arbitrary input.
DecodeResult decode(std::span<const std::uint8_t> bytes);

// --- typed payloads -------------------------------------------------------

struct DataPayload {
  std::uint8_t channel_count = 0;
  std::uint8_t frames_in_packet = 0;
  std::vector<std::uint32_t> status;      // one 24-bit word per frame
  std::vector<std::int32_t> codes;        // frames_in_packet x channel_count

  std::vector<std::uint8_t> pack() const;
  static DataPayload parse(std::span<const std::uint8_t> payload);  // throws CodecError
};

/// Builds data packets from frames (split into chunks of frames_per_packet);
/// timestamps come from the first frame of each packet.
std::vector<Packet> pack_frames(std::span<const SampleFrame> frames, int rate,
                                std::size_t frames_per_packet);

struct SensorPayload {
  SensorFrame frame;  // t is carried by the packet header timestamp

  std::vector<std::uint8_t> pack() const;
  static SensorPayload parse(std::span<const std::uint8_t> payload);
};

struct CommandPayload {
  Opcode opcode = Opcode::start;
  std::uint32_t arg = 0;

  std::vector<std::uint8_t> pack() const;
  static CommandPayload parse(std::span<const std::uint8_t> payload);
};

struct AckPayload {
  Opcode opcode = Opcode::start;  // echoed
  std::uint32_t arg = 0;

  std::vector<std::uint8_t> pack() const;
  static AckPayload parse(std::span<const std::uint8_t> payload);
};

struct ErrorPayload {
  std::uint8_t code = 0;
  std::string reason;

  std::vector<std::uint8_t> pack() const;
  static ErrorPayload parse(std::span<const std::uint8_t> payload);
};

namespace error_code {
constexpr std::uint8_t bad_command = 0x01;
constexpr std::uint8_t bad_argument = 0x02;
constexpr std::uint8_t overflow_disconnect = 0x03;
}  // namespace error_code

/// key=value;key=value ASCII map (keys and values must not contain '=', ';').
struct MetaPayload {
  std::map<std::string, std::string> kv;

  std::vector<std::uint8_t> pack() const;
  static MetaPayload parse(std::span<const std::uint8_t> payload);
  std::string canonical() const;  // sorted "k=v;..." string
};

// --- stream bookkeeping ----------------------------------------------------

struct GapReport {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> gaps;  // (missing_from_seq, count)
  std::vector<std::uint32_t> duplicates;
};

/// Exact gap list from the sequence numbers of one stream; repeated seqs are
/// reported as duplicates, not gaps.
GapReport detect_gaps(std::span<const std::uint32_t> seqs);

}  // namespace ironstream::wire
