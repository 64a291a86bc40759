// SPDX-License-Identifier: Apache-2.0

#include "ironstream/session.hpp"

#include <cstring>
#include <fstream>

#include "ironstream/columnar.hpp"

namespace ironstream {

struct SessionWriter::Impl {
  std::ofstream out;
};

SessionWriter::SessionWriter(const std::string& path, const wire::MetaPayload& meta,
                             bool write_meta_packet)
    : impl_(std::make_unique<Impl>()) {
  impl_->out.open(path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) throw IoError("session: cannot open '" + path + "' for writing");

  std::uint16_t digest = 0;
  if (!meta.kv.empty()) {
    const std::string canon = meta.canonical();
    digest = wire::crc16({reinterpret_cast<const std::uint8_t*>(canon.data()), canon.size()});
  }
  std::uint8_t header[kSessionHeaderSize] = {};
  std::memcpy(header, kSessionMagic, 8);
  header[8] = kSessionVersion;
  header[9] = 0;
  header[10] = static_cast<std::uint8_t>(digest & 0xFF);
  header[11] = static_cast<std::uint8_t>(digest >> 8);
  impl_->out.write(reinterpret_cast<const char*>(header), sizeof(header));

  if (write_meta_packet && !meta.kv.empty()) {
    wire::Packet p;
    p.type = wire::PacketType::meta;
    p.seq = 0;
    p.timestamp_us = 0;
    p.payload = meta.pack();
    write_packet(p);
  }
}

SessionWriter::~SessionWriter() = default;

void SessionWriter::write_packet(const wire::Packet& p) { write_raw(wire::encode(p)); }

void SessionWriter::write_raw(const std::vector<std::uint8_t>& encoded) {
  impl_->out.write(reinterpret_cast<const char*>(encoded.data()),
                   static_cast<std::streamsize>(encoded.size()));
  if (!impl_->out) throw IoError("session: write failed");
  ++count_;
}

void SessionWriter::close() {
  impl_->out.close();
  if (impl_->out.fail()) throw IoError("session: close failed");
}

std::vector<const wire::Packet*> SessionData::of_type(wire::PacketType t) const {
  std::vector<const wire::Packet*> out;
  for (const auto& p : packets)
    if (p.type == t) out.push_back(&p);
  return out;
}

SessionData replay(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("session: cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < kSessionHeaderSize) throw CodecError("session: file shorter than header");
  if (std::memcmp(bytes.data(), kSessionMagic, 8) != 0)
    throw CodecError("session: bad magic (not a session file)");

  SessionData data;
  data.version = bytes[8];
  if (data.version != kSessionVersion)
    throw CodecError("session: unsupported version " + std::to_string(data.version));
  data.config_digest = static_cast<std::uint16_t>(bytes[10] | (bytes[11] << 8));

  std::size_t pos = kSessionHeaderSize;
  while (pos < bytes.size()) {
    const auto r = wire::decode({bytes.data() + pos, bytes.size() - pos});
    if (r.status == wire::DecodeStatus::incomplete) {
      data.truncated = true;  // truncated tail: keep everything complete
      break;
    }
    if (r.status != wire::DecodeStatus::ok)
      throw CodecError(std::string("session: undecodable packet at offset ") +
                       std::to_string(pos) + " (" + wire::to_string(r.status) + ")");
    if (r.packet.type == wire::PacketType::meta && !data.meta)
      data.meta = wire::MetaPayload::parse(r.packet.payload);
    data.packets.push_back(std::move(r.packet));
    pos += r.consumed;
  }
  return data;
}

namespace {

double meta_num(const wire::MetaPayload& m, const std::string& key, double fallback) {
  auto it = m.kv.find(key);
  if (it == m.kv.end()) return fallback;
  return std::stod(it->second);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string::npos) end = s.size();
    if (end > pos) out.push_back(s.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

}  // namespace

DecodedSession decode_session(const SessionData& session) {
  DecodedSession d;
  wire::MetaPayload meta = session.meta.value_or(wire::MetaPayload{});
  d.rate = static_cast<int>(meta_num(meta, "rate", 250));
  d.gain = static_cast<int>(meta_num(meta, "gain", 24));
  d.vref = meta_num(meta, "vref", 4.5);
  d.mains_hz = meta_num(meta, "mains_hz", 0.0);
  d.mains_amplitude = meta_num(meta, "mains_amplitude", 0.0);
  d.cm_probe_hz = meta_num(meta, "cm_probe_hz", 0.0);
  d.cm_probe_amplitude = meta_num(meta, "cm_probe_amplitude", 0.0);
  d.seed = static_cast<std::uint64_t>(meta_num(meta, "seed", 0.0));
  if (auto it = meta.kv.find("labels"); it != meta.kv.end()) d.labels = split_commas(it->second);
  if (auto it = meta.kv.find("occipital"); it != meta.kv.end())
    d.occipital = split_commas(it->second);
  if (auto it = meta.kv.find("frontal"); it != meta.kv.end()) d.frontal = split_commas(it->second);

  for (const auto& p : session.packets) {
    if (p.type == wire::PacketType::sensor) {
      auto s = wire::SensorPayload::parse(p.payload);
      s.frame.t = static_cast<double>(p.timestamp_us) * 1e-6;
      d.sensors.push_back(s.frame);
      continue;
    }
    if (p.type != wire::PacketType::data) continue;
    const auto dp = wire::DataPayload::parse(p.payload);
    if (d.volts.empty()) d.volts.resize(dp.channel_count);
    if (d.volts.size() != dp.channel_count)
      throw CodecError("session: channel count changed mid-stream");
    for (std::size_t f = 0; f < dp.frames_in_packet; ++f) {
      d.status.push_back(dp.status[f]);
      d.frame_seq.push_back(p.seq);
      for (std::size_t c = 0; c < dp.channel_count; ++c)
        d.volts[c].push_back(decode(dp.codes[f * dp.channel_count + c], d.gain, d.vref));
    }
  }
  return d;
}

void export_columnar(const SessionData& session, const std::string& out_path) {
  const DecodedSession d = decode_session(session);
  ColumnarTable table;
  table.names.push_back("t_seconds");
  const std::size_t n_ch = d.volts.size();
  for (std::size_t c = 0; c < n_ch; ++c) {
    const std::string label =
        c < d.labels.size() ? d.labels[c] : "ch" + std::to_string(c + 1);
    table.names.push_back(label + "_uV");
  }
  table.columns.resize(table.names.size());
  const std::size_t n = n_ch == 0 ? 0 : d.volts.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    table.columns[0].push_back(static_cast<double>(i) / d.rate);
    for (std::size_t c = 0; c < n_ch; ++c)
      table.columns[c + 1].push_back(d.volts[c][i] * 1e6);
  }
  write_columnar(out_path, table);
}

}  // namespace ironstream
