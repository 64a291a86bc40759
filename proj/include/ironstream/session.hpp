// SPDX-License-Identifier: Apache-2.0
#pragma once

// Session files: a 16-byte header followed by verbatim encoded packets.
//
//   bytes 0..7   magic "IBCISESS"
//   byte  8      version (0x01)
//   byte  9      flags (0)
//   bytes 10..11 config digest: CRC-16/CCITT-FALSE over the canonical meta
//                string, little-endian (0 when no meta packet is recorded)
//   bytes 12..15 reserved, zero
//
// Replay returns every complete packet; a truncated tail yields the packets
// that fit plus a truncation notice instead of an error.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ironstream/wire.hpp"

namespace ironstream {

constexpr char kSessionMagic[8] = {'I', 'B', 'C', 'I', 'S', 'E', 'S', 'S'};
constexpr std::uint8_t kSessionVersion = 0x01;
constexpr std::size_t kSessionHeaderSize = 16;

class SessionWriter {
 public:
  /// Creates the file, writes the header and, when meta has entries, a meta
  /// packet whose canonical string also provides the header digest. The
  /// record command passes write_meta_packet = false: it captures the
  /// server's own meta packet verbatim and only wants the digest.
  SessionWriter(const std::string& path, const wire::MetaPayload& meta,
                bool write_meta_packet = true);
  ~SessionWriter();
  SessionWriter(const SessionWriter&) = delete;
  SessionWriter& operator=(const SessionWriter&) = delete;

  void write_packet(const wire::Packet& p);
  void write_raw(const std::vector<std::uint8_t>& encoded);
  std::uint64_t packets_written() const { return count_; }
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint64_t count_ = 0;
};

struct SessionData {
  std::uint8_t version = 0;
  std::uint16_t config_digest = 0;
  std::vector<wire::Packet> packets;
  bool truncated = false;           // incomplete trailing packet dropped
  std::optional<wire::MetaPayload> meta;  // first meta packet, if any

  std::vector<const wire::Packet*> of_type(wire::PacketType t) const;
};

SessionData replay(const std::string& path);

/// Decoded data frames of a session as per-channel series (volts), using the
/// codec settings from the meta packet unless overridden.
struct DecodedSession {
  int rate = 0;
  int gain = 0;
  double vref = 0.0;
  std::vector<std::string> labels;       // channel labels from meta (may be empty)
  std::vector<std::string> occipital, frontal;
  MultiSeries volts;                     // [channel][sample]
  std::vector<std::uint32_t> status;     // per frame
  std::vector<std::uint64_t> frame_seq;  // packet seq per frame
  std::vector<SensorFrame> sensors;
  double mains_hz = 0.0, mains_amplitude = 0.0;
  double cm_probe_hz = 0.0, cm_probe_amplitude = 0.0;
  std::uint64_t seed = 0;
};

DecodedSession decode_session(const SessionData& session);

/// Renders the data packets to columnar text (t_seconds, then one microvolt
/// column per channel).
void export_columnar(const SessionData& session, const std::string& out_path);

}  // namespace ironstream
