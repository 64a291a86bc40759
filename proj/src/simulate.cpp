// SPDX-License-Identifier: Apache-2.0

#include "ironstream/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "ironstream/session.hpp"

namespace ironstream {

SimulateResult simulate_to_session(const RunConfig& config, double duration_s,
                                   const std::string& session_path) {
  config.validate();
  if (!(duration_s > 0.0)) throw ConfigError("simulate: duration must be > 0");

  AcquisitionEngine engine(config.scenario, config.montage, config.acq, config.chain);
  SensorBoard board(config.profile, config.scenario.seed);
  SessionWriter writer(session_path, build_meta(config));

  const int rate = config.acq.rate;
  const auto total_frames = static_cast<std::uint64_t>(std::llround(duration_s * rate));
  const std::size_t chunk = config.serve.frames_per_packet;

  SimulateResult result;

  double next_env_t = 0.0, next_imu_t = 0.0;
  auto emit_sensors_until = [&](double t_limit) {
    while (next_env_t <= t_limit || next_imu_t <= t_limit) {
      const bool env_first = next_env_t <= next_imu_t;
      const double t = env_first ? next_env_t : next_imu_t;
      if (t > t_limit) break;
      SensorFrame f = board.poll(t);
      if (!env_first) f.validity &= SensorFrame::kAccel | SensorFrame::kGyro;
      wire::Packet p;
      p.type = wire::PacketType::sensor;
      p.seq = static_cast<std::uint32_t>(result.sensor_packets);
      p.timestamp_us = static_cast<std::uint64_t>(std::llround(t * 1e6));
      p.payload = wire::SensorPayload{f}.pack();
      writer.write_packet(p);
      ++result.sensor_packets;
      if (env_first)
        next_env_t += 1.0 / config.serve.env_poll_hz;
      else
        next_imu_t += 1.0 / config.serve.imu_poll_hz;
    }
  };

  std::uint64_t produced = 0;
  std::uint32_t data_seq = 0;
  while (produced < total_frames) {
    const std::size_t m =
        static_cast<std::size_t>(std::min<std::uint64_t>(chunk, total_frames - produced));
    const auto frames = engine.acquire(m);
    const std::uint64_t ts = produced * 1000000ULL / static_cast<std::uint64_t>(rate);
    emit_sensors_until(static_cast<double>(ts) * 1e-6);

    wire::DataPayload d;
    d.channel_count = static_cast<std::uint8_t>(frames.front().codes.size());
    d.frames_in_packet = static_cast<std::uint8_t>(frames.size());
    for (const auto& f : frames) {
      d.status.push_back(f.status & 0xFFFFFF);
      for (auto code : f.codes) d.codes.push_back(code);
    }
    wire::Packet p;
    p.type = wire::PacketType::data;
    p.seq = data_seq++;
    p.timestamp_us = ts;
    p.payload = d.pack();
    writer.write_packet(p);
    ++result.data_packets;
    produced += m;
  }
  // trailing sensor polls inside the acquisition span
  emit_sensors_until(duration_s - 1e-9);

  result.frames = produced;
  result.saturated_samples = engine.saturated_samples();
  result.warnings = engine.warnings();
  writer.close();
  return result;
}

}  // namespace ironstream
