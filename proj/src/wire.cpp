// SPDX-License-Identifier: Apache-2.0

#include "ironstream/wire.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace ironstream::wire {

const char* to_string(PacketType t) {
  switch (t) {
    case PacketType::data: return "data";
    case PacketType::sensor: return "sensor";
    case PacketType::command: return "command";
    case PacketType::ack: return "ack";
    case PacketType::error: return "error";
    case PacketType::meta: return "meta";
  }
  return "?";
}

const char* to_string(Opcode o) {
  switch (o) {
    case Opcode::start: return "START";
    case Opcode::stop: return "STOP";
    case Opcode::set_rate: return "SET_RATE";
    case Opcode::set_gain: return "SET_GAIN";
    case Opcode::impedance_mode: return "IMPEDANCE_MODE";
    case Opcode::sensors_on: return "SENSORS_ON";
    case Opcode::sensors_off: return "SENSORS_OFF";
  }
  return "?";
}

const char* to_string(DecodeStatus s) {
  switch (s) {
    case DecodeStatus::ok: return "ok";
    case DecodeStatus::incomplete: return "incomplete";
    case DecodeStatus::not_our_protocol: return "not-our-protocol";
    case DecodeStatus::bad_version: return "bad-version";
    case DecodeStatus::bad_length: return "bad-length";
    case DecodeStatus::corruption: return "corruption";
  }
  return "?";
}

namespace {

struct Crc16Table {
  std::uint16_t t[256];
  constexpr Crc16Table() : t{} {
    for (int b = 0; b < 256; ++b) {
      std::uint16_t c = static_cast<std::uint16_t>(b << 8);
      for (int i = 0; i < 8; ++i)
        c = static_cast<std::uint16_t>((c & 0x8000) ? (c << 1) ^ 0x1021 : (c << 1));
      t[b] = c;
    }
  }
};

constexpr Crc16Table kCrcTable{};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void put_f32(std::vector<std::uint8_t>& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

double get_f32(const std::uint8_t* p) {
  return static_cast<double>(std::bit_cast<float>(get_u32(p)));
}

// 3-byte big-endian two's complement
void put_code24(std::vector<std::uint8_t>& out, std::int32_t code) {
  const std::uint32_t u = static_cast<std::uint32_t>(code) & 0xFFFFFF;
  out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>(u & 0xFF));
}

std::int32_t get_code24(const std::uint8_t* p) {
  std::uint32_t u = (static_cast<std::uint32_t>(p[0]) << 16) |
                    (static_cast<std::uint32_t>(p[1]) << 8) | p[2];
  if (u & 0x800000) u |= 0xFF000000;
  return static_cast<std::int32_t>(u);
}

}  // namespace

std::uint16_t crc16(std::span<const std::uint8_t> bytes) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t b : bytes)
    crc = static_cast<std::uint16_t>((crc << 8) ^ kCrcTable.t[((crc >> 8) ^ b) & 0xFF]);
  return crc;
}

std::vector<std::uint8_t> encode(const Packet& p) {
  if (p.payload.size() > kMaxPayload)
    throw CodecError("encode: payload exceeds " + std::to_string(kMaxPayload) + " bytes");
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + p.payload.size() + kTrailerSize);
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(p.type));
  put_u32(out, p.seq);
  put_u64(out, p.timestamp_us);
  put_u16(out, static_cast<std::uint16_t>(p.payload.size()));
  out.insert(out.end(), p.payload.begin(), p.payload.end());
  put_u16(out, crc16({out.data(), out.size()}));
  return out;
}

DecodeResult decode(std::span<const std::uint8_t> bytes) {
  DecodeResult r;
  // magic first: reject as early as the prefix disagrees
  const std::size_t prefix = std::min<std::size_t>(bytes.size(), 4);
  for (std::size_t i = 0; i < prefix; ++i) {
    if (bytes[i] != static_cast<std::uint8_t>(kMagic[i])) {
      r.status = DecodeStatus::not_our_protocol;
      r.consumed = i + 1;
      return r;
    }
  }
  if (bytes.size() < kHeaderSize) {
    r.status = DecodeStatus::incomplete;
    r.needed = kHeaderSize - bytes.size();
    return r;
  }
  if (bytes[4] != kVersion) {
    r.status = DecodeStatus::bad_version;
    r.consumed = kHeaderSize;
    return r;
  }
  const std::uint16_t len = get_u16(bytes.data() + 18);
  if (len > kMaxPayload) {
    r.status = DecodeStatus::bad_length;
    r.consumed = kHeaderSize;
    return r;
  }
  const std::size_t total = kHeaderSize + len + kTrailerSize;
  if (bytes.size() < total) {
    r.status = DecodeStatus::incomplete;
    r.needed = total - bytes.size();
    return r;
  }
  const std::uint16_t stored = get_u16(bytes.data() + kHeaderSize + len);
  const std::uint16_t computed = crc16(bytes.subspan(0, kHeaderSize + len));
  if (stored != computed) {
    r.status = DecodeStatus::corruption;
    r.consumed = total;
    return r;
  }
  r.status = DecodeStatus::ok;
  r.consumed = total;
  r.packet.type = static_cast<PacketType>(bytes[5]);
  r.packet.seq = get_u32(bytes.data() + 6);
  r.packet.timestamp_us = get_u64(bytes.data() + 10);
  r.packet.payload.assign(bytes.begin() + kHeaderSize,
                          bytes.begin() + static_cast<std::ptrdiff_t>(kHeaderSize + len));
  return r;
}

std::vector<std::uint8_t> DataPayload::pack() const {
  if (status.size() != frames_in_packet ||
      codes.size() != static_cast<std::size_t>(frames_in_packet) * channel_count)
    throw CodecError("data payload: inconsistent frame/status/code counts");
  std::vector<std::uint8_t> out;
  out.reserve(2 + static_cast<std::size_t>(frames_in_packet) * 3 * (channel_count + 1));
  out.push_back(channel_count);
  out.push_back(frames_in_packet);
  for (std::size_t f = 0; f < frames_in_packet; ++f) {
    put_code24(out, static_cast<std::int32_t>(status[f] & 0xFFFFFF));
    for (std::size_t c = 0; c < channel_count; ++c)
      put_code24(out, codes[f * channel_count + c]);
  }
  return out;
}

DataPayload DataPayload::parse(std::span<const std::uint8_t> payload) {
  if (payload.size() < 2) throw CodecError("data payload: too short");
  DataPayload d;
  d.channel_count = payload[0];
  d.frames_in_packet = payload[1];
  const std::size_t expected =
      2 + static_cast<std::size_t>(d.frames_in_packet) * 3 * (d.channel_count + 1);
  if (payload.size() != expected)
    throw CodecError("data payload: length " + std::to_string(payload.size()) + " != expected " +
                     std::to_string(expected));
  const std::uint8_t* p = payload.data() + 2;
  for (std::size_t f = 0; f < d.frames_in_packet; ++f) {
    d.status.push_back(static_cast<std::uint32_t>(get_code24(p)) & 0xFFFFFF);
    p += 3;
    for (std::size_t c = 0; c < d.channel_count; ++c) {
      d.codes.push_back(get_code24(p));
      p += 3;
    }
  }
  return d;
}

std::vector<Packet> pack_frames(std::span<const SampleFrame> frames, int rate,
                                std::size_t frames_per_packet) {
  if (frames_per_packet == 0) throw CodecError("pack_frames: frames_per_packet must be > 0");
  std::vector<Packet> out;
  for (std::size_t start = 0; start < frames.size(); start += frames_per_packet) {
    const std::size_t m = std::min(frames_per_packet, frames.size() - start);
    DataPayload d;
    d.channel_count = static_cast<std::uint8_t>(frames[start].codes.size());
    d.frames_in_packet = static_cast<std::uint8_t>(m);
    for (std::size_t f = 0; f < m; ++f) {
      const SampleFrame& fr = frames[start + f];
      d.status.push_back(fr.status & 0xFFFFFF);
      for (auto code : fr.codes) d.codes.push_back(code);
    }
    Packet p;
    p.type = PacketType::data;
    p.timestamp_us = frames[start].index * 1000000ULL / static_cast<std::uint64_t>(rate);
    p.payload = d.pack();
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<std::uint8_t> SensorPayload::pack() const {
  std::vector<std::uint8_t> out;
  out.reserve(2 + 12 * 4);
  put_u16(out, frame.validity);
  put_f32(out, frame.co2_ppm);
  put_f32(out, frame.temp_c);
  put_f32(out, frame.rh_pct);
  put_f32(out, frame.sound_db_spl);
  put_f32(out, frame.spo2_pct);
  put_f32(out, frame.pulse_bpm);
  for (double v : frame.accel_g) put_f32(out, v);
  for (double v : frame.gyro_dps) put_f32(out, v);
  return out;
}

SensorPayload SensorPayload::parse(std::span<const std::uint8_t> payload) {
  if (payload.size() != 2 + 12 * 4) throw CodecError("sensor payload: wrong length");
  SensorPayload s;
  const std::uint8_t* p = payload.data();
  s.frame.validity = get_u16(p);
  p += 2;
  auto next = [&p] {
    const double v = get_f32(p);
    p += 4;
    return v;
  };
  s.frame.co2_ppm = next();
  s.frame.temp_c = next();
  s.frame.rh_pct = next();
  s.frame.sound_db_spl = next();
  s.frame.spo2_pct = next();
  s.frame.pulse_bpm = next();
  for (auto& v : s.frame.accel_g) v = next();
  for (auto& v : s.frame.gyro_dps) v = next();
  return s;
}

std::vector<std::uint8_t> CommandPayload::pack() const {
  std::vector<std::uint8_t> out;
  out.push_back(static_cast<std::uint8_t>(opcode));
  put_u32(out, arg);
  return out;
}

CommandPayload CommandPayload::parse(std::span<const std::uint8_t> payload) {
  if (payload.size() != 5) throw CodecError("command payload: wrong length");
  const std::uint8_t op = payload[0];
  if (op < 0x01 || op > 0x07) throw CodecError("command payload: unknown opcode");
  return {static_cast<Opcode>(op), get_u32(payload.data() + 1)};
}

std::vector<std::uint8_t> AckPayload::pack() const {
  std::vector<std::uint8_t> out;
  out.push_back(static_cast<std::uint8_t>(opcode));
  put_u32(out, arg);
  return out;
}

AckPayload AckPayload::parse(std::span<const std::uint8_t> payload) {
  if (payload.size() != 5) throw CodecError("ack payload: wrong length");
  return {static_cast<Opcode>(payload[0]), get_u32(payload.data() + 1)};
}

std::vector<std::uint8_t> ErrorPayload::pack() const {
  std::vector<std::uint8_t> out;
  out.push_back(code);
  out.insert(out.end(), reason.begin(), reason.end());
  return out;
}

ErrorPayload ErrorPayload::parse(std::span<const std::uint8_t> payload) {
  if (payload.empty()) throw CodecError("error payload: empty");
  ErrorPayload e;
  e.code = payload[0];
  e.reason.assign(payload.begin() + 1, payload.end());
  return e;
}

std::string MetaPayload::canonical() const {
  std::string s;
  for (const auto& [k, v] : kv) {  // std::map iterates sorted
    if (!s.empty()) s += ';';
    s += k + "=" + v;
  }
  return s;
}

std::vector<std::uint8_t> MetaPayload::pack() const {
  for (const auto& [k, v] : kv) {
    if (k.find_first_of("=;") != std::string::npos || v.find_first_of("=;") != std::string::npos)
      throw CodecError("meta payload: keys/values must not contain '=' or ';'");
  }
  const std::string s = canonical();
  return {s.begin(), s.end()};
}

MetaPayload MetaPayload::parse(std::span<const std::uint8_t> payload) {
  MetaPayload m;
  std::string s(payload.begin(), payload.end());
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t end = s.find(';', pos);
    if (end == std::string::npos) end = s.size();
    const std::string item = s.substr(pos, end - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw CodecError("meta payload: malformed item");
    m.kv[item.substr(0, eq)] = item.substr(eq + 1);
    pos = end + 1;
  }
  return m;
}

GapReport detect_gaps(std::span<const std::uint32_t> seqs) {
  GapReport report;
  if (seqs.empty()) return report;
  std::vector<std::uint32_t> sorted(seqs.begin(), seqs.end());
  std::sort(sorted.begin(), sorted.end());
  // streams start at seq 0, so a missing head is a gap too
  if (sorted.front() > 0) report.gaps.emplace_back(0, sorted.front());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1]) {
      if (report.duplicates.empty() || report.duplicates.back() != sorted[i])
        report.duplicates.push_back(sorted[i]);
    } else if (sorted[i] > sorted[i - 1] + 1) {
      report.gaps.emplace_back(sorted[i - 1] + 1, sorted[i] - sorted[i - 1] - 1);
    }
  }
  return report;
}

}  // namespace ironstream::wire
