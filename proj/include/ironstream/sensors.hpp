// SPDX-License-Identifier: Apache-2.0
#pragma once

// Environmental/physiological sensor board behind a byte-level I2C model:
// seven register-mapped peripherals polled into timestamped SensorFrames.
// Addresses, register layouts and raw-code conversions are frozen in
// docs/registers.md.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ironstream/errors.hpp"

namespace ironstream {

struct SensorGroundTruth {
  double co2_ppm = 400.0;
  double temp_c = 25.0;
  double rh_pct = 40.0;
  double sound_db_spl = 35.0;
  double spo2_pct = 98.0;
  double pulse_bpm = 65.0;
  std::array<double, 3> accel_g{0.0, 0.0, 1.0};
  std::array<double, 3> gyro_dps{0.0, 0.0, 0.0};
};

/// Piecewise ground-truth profile per quantity: constants and linear ramps,
/// plus an optional per-quantity noise sigma applied inside the emulated
/// device. Quantities: co2, temp, rh, sound, spo2, pulse, accel_x/y/z,
/// gyro_x/y/z.
class SensorProfile {
 public:
  struct Segment {
    double t0 = 0.0, t1 = 0.0;  // t1 <= t0 means "constant from t0 on"
    double v0 = 0.0, v1 = 0.0;
  };

  static const std::vector<std::string>& quantity_names();

  SensorProfile();  // rest defaults (SensorGroundTruth default values)

  void set_constant(const std::string& quantity, double value);
  void add_ramp(const std::string& quantity, double v0, double v1, double t0, double t1);
  void set_noise_sigma(const std::string& quantity, double sigma);

  double value_at(const std::string& quantity, double t) const;
  double noise_sigma(const std::string& quantity) const;

 private:
  std::map<std::string, std::vector<Segment>> segments_;
  std::map<std::string, double> sigma_;
};

/// Ground truth at time t (no sensor noise).
SensorGroundTruth sensor_scenario(const SensorProfile& profile, double t);

enum class I2cOp { write_reg, read_reg };

struct I2cResult {
  bool ack = false;
  std::uint8_t data = 0;
};

class I2cDevice {
 public:
  virtual ~I2cDevice() = default;
  virtual std::uint8_t read_reg(std::uint8_t reg) = 0;
  virtual void write_reg(std::uint8_t reg, std::uint8_t value) = 0;
  /// Samples the ground truth (plus seeded device noise) into the data registers.
  virtual void latch(const SensorGroundTruth& truth, std::uint64_t noise_key) = 0;
};

/// Single-master byte-level bus: devices keyed by 7-bit address; transactions
/// to absent addresses NACK and never throw.
class I2cBus {
 public:
  void add_device(std::uint8_t addr, std::unique_ptr<I2cDevice> dev);
  std::unique_ptr<I2cDevice> remove_device(std::uint8_t addr);
  bool present(std::uint8_t addr) const;
  I2cDevice* device(std::uint8_t addr);

  I2cResult transaction(std::uint8_t addr, I2cOp op, std::uint8_t reg, std::uint8_t data = 0);

 private:
  std::map<std::uint8_t, std::unique_ptr<I2cDevice>> devices_;
};

struct SensorFrame {
  double t = 0.0;
  double co2_ppm = 0.0;
  double temp_c = 0.0;
  double rh_pct = 0.0;
  double sound_db_spl = 0.0;
  double spo2_pct = 0.0;
  double pulse_bpm = 0.0;
  std::array<double, 3> accel_g{0.0, 0.0, 0.0};
  std::array<double, 3> gyro_dps{0.0, 0.0, 0.0};
  std::uint16_t validity = 0;  // bits: 0 co2, 1 temp, 2 rh, 3 sound, 4 spo2, 5 pulse, 6 accel, 7 gyro

  static constexpr std::uint16_t kCo2 = 1 << 0;
  static constexpr std::uint16_t kTemp = 1 << 1;
  static constexpr std::uint16_t kRh = 1 << 2;
  static constexpr std::uint16_t kSound = 1 << 3;
  static constexpr std::uint16_t kSpo2 = 1 << 4;
  static constexpr std::uint16_t kPulse = 1 << 5;
  static constexpr std::uint16_t kAccel = 1 << 6;
  static constexpr std::uint16_t kGyro = 1 << 7;
  static constexpr std::uint16_t kAll = 0xFF;

  bool valid(std::uint16_t bit) const { return (validity & bit) != 0; }
};

namespace sensor_addr {
constexpr std::uint8_t co2 = 0x62;
constexpr std::uint8_t temp = 0x48;
constexpr std::uint8_t rh = 0x40;
constexpr std::uint8_t sound = 0x4A;
constexpr std::uint8_t spo2 = 0x57;
constexpr std::uint8_t pulse = 0x5A;
constexpr std::uint8_t imu = 0x68;
}  // namespace sensor_addr

/// Owns the bus populated with the seven devices and drives polling: at each
/// poll the devices latch profile(t) (with deterministic per-device noise)
/// and the frame is assembled through real bus transactions. NACKed devices
/// clear their validity bits.
class SensorBoard {
 public:
  SensorBoard(SensorProfile profile, std::uint64_t seed);

  I2cBus& bus() { return bus_; }
  const SensorProfile& profile() const { return profile_; }

  SensorFrame poll(double t);

 private:
  SensorProfile profile_;
  std::uint64_t seed_;
  I2cBus bus_;
};

}  // namespace ironstream
