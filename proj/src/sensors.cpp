// SPDX-License-Identifier: Apache-2.0

#include "ironstream/sensors.hpp"

#include <algorithm>
#include <cmath>

#include "ironstream/rng.hpp"

namespace ironstream {

namespace {

const std::vector<std::string> kQuantities = {
    "co2",     "temp",    "rh",      "sound",  "spo2",   "pulse",
    "accel_x", "accel_y", "accel_z", "gyro_x", "gyro_y", "gyro_z",
};

double rest_default(const std::string& q) {
  static const SensorGroundTruth d;
  if (q == "co2") return d.co2_ppm;
  if (q == "temp") return d.temp_c;
  if (q == "rh") return d.rh_pct;
  if (q == "sound") return d.sound_db_spl;
  if (q == "spo2") return d.spo2_pct;
  if (q == "pulse") return d.pulse_bpm;
  if (q == "accel_z") return 1.0;  // gravity
  return 0.0;
}

// One deterministic N(0,1) keyed by (seed, device, poll time): polling twice
// at the same t gives the same noise.
double keyed_normal(std::uint64_t key) {
  const std::uint64_t a = splitmix64(key);
  const std::uint64_t b = splitmix64(a);
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1p-53;
  const double u2 = (static_cast<double>(b >> 11) + 1.0) * 0x1p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925286766559 * u2);
}

std::int32_t clamp_code(double v, std::int32_t lo, std::int32_t hi) {
  const double r = std::floor(v + 0.5);
  if (r < static_cast<double>(lo)) return lo;
  if (r > static_cast<double>(hi)) return hi;
  return static_cast<std::int32_t>(r);
}

}  // namespace

const std::vector<std::string>& SensorProfile::quantity_names() { return kQuantities; }

SensorProfile::SensorProfile() {
  for (const auto& q : kQuantities) segments_[q] = {Segment{0.0, 0.0, rest_default(q), 0.0}};
}

void SensorProfile::set_constant(const std::string& quantity, double value) {
  if (!segments_.count(quantity)) throw ConfigError("profile: unknown quantity '" + quantity + "'");
  segments_[quantity] = {Segment{0.0, 0.0, value, 0.0}};
}

void SensorProfile::add_ramp(const std::string& quantity, double v0, double v1, double t0,
                             double t1) {
  if (!segments_.count(quantity)) throw ConfigError("profile: unknown quantity '" + quantity + "'");
  if (!(t1 > t0)) throw ConfigError("profile: ramp needs t1 > t0");
  segments_[quantity].push_back(Segment{t0, t1, v0, v1});
}

void SensorProfile::set_noise_sigma(const std::string& quantity, double sigma) {
  if (!segments_.count(quantity)) throw ConfigError("profile: unknown quantity '" + quantity + "'");
  if (sigma < 0.0) throw ConfigError("profile: noise sigma must be >= 0");
  sigma_[quantity] = sigma;
}

double SensorProfile::value_at(const std::string& quantity, double t) const {
  auto it = segments_.find(quantity);
  if (it == segments_.end()) throw ConfigError("profile: unknown quantity '" + quantity + "'");
  // last matching segment wins; ramps clamp outside their span
  double value = 0.0;
  for (const auto& s : it->second) {
    if (s.t1 <= s.t0) {
      if (t >= s.t0) value = s.v0;
    } else if (t >= s.t0 && t <= s.t1) {
      value = s.v0 + (s.v1 - s.v0) * (t - s.t0) / (s.t1 - s.t0);
    } else if (t > s.t1) {
      value = s.v1;
    }
  }
  return value;
}

double SensorProfile::noise_sigma(const std::string& quantity) const {
  auto it = sigma_.find(quantity);
  return it == sigma_.end() ? 0.0 : it->second;
}

SensorGroundTruth sensor_scenario(const SensorProfile& profile, double t) {
  SensorGroundTruth g;
  g.co2_ppm = profile.value_at("co2", t);
  g.temp_c = profile.value_at("temp", t);
  g.rh_pct = profile.value_at("rh", t);
  g.sound_db_spl = profile.value_at("sound", t);
  g.spo2_pct = profile.value_at("spo2", t);
  g.pulse_bpm = profile.value_at("pulse", t);
  g.accel_g = {profile.value_at("accel_x", t), profile.value_at("accel_y", t),
               profile.value_at("accel_z", t)};
  g.gyro_dps = {profile.value_at("gyro_x", t), profile.value_at("gyro_y", t),
                profile.value_at("gyro_z", t)};
  return g;
}

void I2cBus::add_device(std::uint8_t addr, std::unique_ptr<I2cDevice> dev) {
  if (addr < 0x08 || addr > 0x77) throw ConfigError("i2c: address outside [0x08, 0x77]");
  if (devices_.count(addr)) throw ConfigError("i2c: duplicate device address");
  devices_[addr] = std::move(dev);
}

std::unique_ptr<I2cDevice> I2cBus::remove_device(std::uint8_t addr) {
  auto it = devices_.find(addr);
  if (it == devices_.end()) return nullptr;
  auto dev = std::move(it->second);
  devices_.erase(it);
  return dev;
}

bool I2cBus::present(std::uint8_t addr) const { return devices_.count(addr) != 0; }

I2cDevice* I2cBus::device(std::uint8_t addr) {
  auto it = devices_.find(addr);
  return it == devices_.end() ? nullptr : it->second.get();
}

I2cResult I2cBus::transaction(std::uint8_t addr, I2cOp op, std::uint8_t reg, std::uint8_t data) {
  auto it = devices_.find(addr);
  if (it == devices_.end()) return {false, 0};  // NACK, never a crash
  if (op == I2cOp::write_reg) {
    it->second->write_reg(reg, data);
    return {true, 0};
  }
  return {true, it->second->read_reg(reg)};
}

namespace {

// Common base: WHO_AM_I at 0x00, CONFIG at 0x01, data from 0x02. Unmapped
// registers read 0x00; writes outside CONFIG are dropped.
class RegisterMappedSensor : public I2cDevice {
 public:
  RegisterMappedSensor(std::uint8_t who_am_i, std::size_t data_bytes)
      : who_(who_am_i), data_(data_bytes, 0) {}

  std::uint8_t read_reg(std::uint8_t reg) override {
    if (reg == 0x00) return who_;
    if (reg == 0x01) return config_;
    if (reg >= 2) {
      const std::size_t idx = static_cast<std::size_t>(reg) - 2;
      if (idx < data_.size()) return data_[idx];
    }
    return 0x00;
  }

  void write_reg(std::uint8_t reg, std::uint8_t value) override {
    if (reg == 0x01) config_ = value;
  }

 protected:
  void store16(std::size_t offset, std::int32_t code) {
    data_[offset] = static_cast<std::uint8_t>((code >> 8) & 0xFF);
    data_[offset + 1] = static_cast<std::uint8_t>(code & 0xFF);
  }

  std::uint8_t who_;
  std::uint8_t config_ = 0;
  std::vector<std::uint8_t> data_;
};

// raw-code conversions per docs/registers.md
class Co2Sensor : public RegisterMappedSensor {
 public:
  Co2Sensor() : RegisterMappedSensor(0xC2, 2) {}
  void latch(const SensorGroundTruth& g, std::uint64_t key) override {
    store16(0, clamp_code(g.co2_ppm + sigma * keyed_normal(key), 0, 65535));
  }
  double sigma = 0.0;
};

class TempSensor : public RegisterMappedSensor {
 public:
  TempSensor() : RegisterMappedSensor(0x71, 2) {}
  void latch(const SensorGroundTruth& g, std::uint64_t key) override {
    const std::int32_t code =
        clamp_code((g.temp_c + sigma * keyed_normal(key)) * 256.0, -32768, 32767);
    store16(0, code & 0xFFFF);
  }
  double sigma = 0.0;
};

class RhSensor : public RegisterMappedSensor {
 public:
  RhSensor() : RegisterMappedSensor(0x85, 2) {}
  void latch(const SensorGroundTruth& g, std::uint64_t key) override {
    const double v = std::clamp(g.rh_pct + sigma * keyed_normal(key), 0.0, 100.0);
    store16(0, clamp_code(v * 512.0, 0, 51200));
  }
  double sigma = 0.0;
};

class SoundSensor : public RegisterMappedSensor {
 public:
  SoundSensor() : RegisterMappedSensor(0x5D, 2) {}
  void latch(const SensorGroundTruth& g, std::uint64_t key) override {
    store16(0, clamp_code((g.sound_db_spl + sigma * keyed_normal(key)) * 256.0, 0, 65535));
  }
  double sigma = 0.0;
};

class Spo2Sensor : public RegisterMappedSensor {
 public:
  Spo2Sensor() : RegisterMappedSensor(0x50, 1) {}
  void latch(const SensorGroundTruth& g, std::uint64_t key) override {
    const double v = std::clamp(g.spo2_pct + sigma * keyed_normal(key), 0.0, 100.0);
    data_[0] = static_cast<std::uint8_t>(clamp_code(v, 0, 100));
  }
  double sigma = 0.0;
};

class PulseSensor : public RegisterMappedSensor {
 public:
  PulseSensor() : RegisterMappedSensor(0xB1, 1) {}
  void latch(const SensorGroundTruth& g, std::uint64_t key) override {
    data_[0] = static_cast<std::uint8_t>(
        clamp_code(g.pulse_bpm + sigma * keyed_normal(key), 0, 255));
  }
  double sigma = 0.0;
};

class ImuSensor : public RegisterMappedSensor {
 public:
  static constexpr double kAccelLsbPerG = 4096.0;
  static constexpr double kGyroLsbPerDps = 16.0;

  ImuSensor() : RegisterMappedSensor(0x6A, 12) {}
  void latch(const SensorGroundTruth& g, std::uint64_t key) override {
    for (int axis = 0; axis < 3; ++axis) {
      const double a =
          g.accel_g[axis] + accel_sigma * keyed_normal(splitmix64(key) + 2 * axis);
      store16(static_cast<std::size_t>(2 * axis),
              clamp_code(a * kAccelLsbPerG, -32768, 32767) & 0xFFFF);
      const double w =
          g.gyro_dps[axis] + gyro_sigma * keyed_normal(splitmix64(key) + 2 * axis + 1);
      store16(static_cast<std::size_t>(6 + 2 * axis),
              clamp_code(w * kGyroLsbPerDps, -32768, 32767) & 0xFFFF);
    }
  }
  double accel_sigma = 0.0;
  double gyro_sigma = 0.0;
};

std::int32_t read16(I2cBus& bus, std::uint8_t addr, std::uint8_t reg, bool& ok) {
  const auto hi = bus.transaction(addr, I2cOp::read_reg, reg);
  const auto lo = bus.transaction(addr, I2cOp::read_reg, static_cast<std::uint8_t>(reg + 1));
  ok = hi.ack && lo.ack;
  return (static_cast<std::int32_t>(hi.data) << 8) | lo.data;
}

std::int32_t sign16(std::int32_t raw) { return raw >= 32768 ? raw - 65536 : raw; }

}  // namespace

SensorBoard::SensorBoard(SensorProfile profile, std::uint64_t seed)
    : profile_(std::move(profile)), seed_(seed) {
  auto co2 = std::make_unique<Co2Sensor>();
  co2->sigma = profile_.noise_sigma("co2");
  auto temp = std::make_unique<TempSensor>();
  temp->sigma = profile_.noise_sigma("temp");
  auto rh = std::make_unique<RhSensor>();
  rh->sigma = profile_.noise_sigma("rh");
  auto sound = std::make_unique<SoundSensor>();
  sound->sigma = profile_.noise_sigma("sound");
  auto spo2 = std::make_unique<Spo2Sensor>();
  spo2->sigma = profile_.noise_sigma("spo2");
  auto pulse = std::make_unique<PulseSensor>();
  pulse->sigma = profile_.noise_sigma("pulse");
  auto imu = std::make_unique<ImuSensor>();
  imu->accel_sigma = profile_.noise_sigma("accel_x");
  imu->gyro_sigma = profile_.noise_sigma("gyro_x");

  bus_.add_device(sensor_addr::co2, std::move(co2));
  bus_.add_device(sensor_addr::temp, std::move(temp));
  bus_.add_device(sensor_addr::rh, std::move(rh));
  bus_.add_device(sensor_addr::sound, std::move(sound));
  bus_.add_device(sensor_addr::spo2, std::move(spo2));
  bus_.add_device(sensor_addr::pulse, std::move(pulse));
  bus_.add_device(sensor_addr::imu, std::move(imu));
}

SensorFrame SensorBoard::poll(double t) {
  const SensorGroundTruth truth = sensor_scenario(profile_, t);
  const std::uint64_t t_key = static_cast<std::uint64_t>(std::llround(t * 1e6));

  for (std::uint8_t addr : {sensor_addr::co2, sensor_addr::temp, sensor_addr::rh,
                            sensor_addr::sound, sensor_addr::spo2, sensor_addr::pulse,
                            sensor_addr::imu}) {
    if (I2cDevice* dev = bus_.device(addr))
      dev->latch(truth, stream_key(seed_, (static_cast<std::uint64_t>(addr) << 40) ^ t_key));
  }

  SensorFrame f;
  f.t = t;
  bool ok = false;

  const std::int32_t co2 = read16(bus_, sensor_addr::co2, 0x02, ok);
  if (ok) {
    f.co2_ppm = static_cast<double>(co2);
    f.validity |= SensorFrame::kCo2;
  }
  const std::int32_t temp = read16(bus_, sensor_addr::temp, 0x02, ok);
  if (ok) {
    f.temp_c = static_cast<double>(sign16(temp)) / 256.0;
    f.validity |= SensorFrame::kTemp;
  }
  const std::int32_t rh = read16(bus_, sensor_addr::rh, 0x02, ok);
  if (ok) {
    f.rh_pct = static_cast<double>(rh) / 512.0;
    f.validity |= SensorFrame::kRh;
  }
  const std::int32_t sound = read16(bus_, sensor_addr::sound, 0x02, ok);
  if (ok) {
    f.sound_db_spl = static_cast<double>(sound) / 256.0;
    f.validity |= SensorFrame::kSound;
  }
  const auto spo2 = bus_.transaction(sensor_addr::spo2, I2cOp::read_reg, 0x02);
  if (spo2.ack) {
    f.spo2_pct = static_cast<double>(spo2.data);
    f.validity |= SensorFrame::kSpo2;
  }
  const auto pulse = bus_.transaction(sensor_addr::pulse, I2cOp::read_reg, 0x02);
  if (pulse.ack) {
    f.pulse_bpm = static_cast<double>(pulse.data);
    f.validity |= SensorFrame::kPulse;
  }
  bool accel_ok = true, gyro_ok = true;
  for (int axis = 0; axis < 3; ++axis) {
    bool a_ok = false, g_ok = false;
    const std::int32_t a =
        read16(bus_, sensor_addr::imu, static_cast<std::uint8_t>(0x02 + 2 * axis), a_ok);
    const std::int32_t g =
        read16(bus_, sensor_addr::imu, static_cast<std::uint8_t>(0x08 + 2 * axis), g_ok);
    accel_ok = accel_ok && a_ok;
    gyro_ok = gyro_ok && g_ok;
    if (a_ok) f.accel_g[axis] = static_cast<double>(sign16(a)) / ImuSensor::kAccelLsbPerG;
    if (g_ok) f.gyro_dps[axis] = static_cast<double>(sign16(g)) / ImuSensor::kGyroLsbPerDps;
  }
  if (accel_ok) f.validity |= SensorFrame::kAccel;
  if (gyro_ok) f.validity |= SensorFrame::kGyro;

  return f;
}

}  // namespace ironstream
