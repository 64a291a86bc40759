// SPDX-License-Identifier: Apache-2.0
#pragma once

// Register-file and datapath model of an ADS1299-class EEG converter:
// 24-bit codes, PGA gains 1..24, lead-off excitation, daisy-chained devices
// (8 channels each). Addresses, reset values and bit fields are frozen in
// docs/registers.md.

#include <cstdint>
#include <string>
#include <vector>

#include "ironstream/errors.hpp"
#include "ironstream/scenario.hpp"

namespace ironstream {

namespace reg {
constexpr std::uint8_t ID = 0x00;          // read-only, reads 0x3E
constexpr std::uint8_t CONFIG1 = 0x01;     // [2:0] data-rate select
constexpr std::uint8_t CONFIG2 = 0x02;     // test signal (stubbed)
constexpr std::uint8_t CONFIG3 = 0x03;     // bit2 = bias loop enabled
constexpr std::uint8_t LOFF = 0x04;        // [1:0] FLEAD_OFF, [3:2] ILEAD_OFF
constexpr std::uint8_t CH1SET = 0x05;      // ..CH8SET at 0x0C; bit7 PD, [6:4] gain, [2:0] mux
constexpr std::uint8_t CH8SET = 0x0C;
constexpr std::uint8_t BIAS_SENSP = 0x0D;
constexpr std::uint8_t BIAS_SENSN = 0x0E;
constexpr std::uint8_t LOFF_SENSP = 0x0F;  // per-channel lead-off excitation enable (P side)
constexpr std::uint8_t LOFF_SENSN = 0x10;  // per-channel lead-off sensing of the reference (N)
constexpr std::uint8_t LOFF_FLIP = 0x11;
constexpr std::uint8_t LOFF_STATP = 0x12;  // read-only comparator status
constexpr std::uint8_t LOFF_STATN = 0x13;  // read-only comparator status
constexpr std::uint8_t GPIO = 0x14;
constexpr std::uint8_t MISC1 = 0x15;
constexpr std::uint8_t MISC2 = 0x16;
constexpr std::uint8_t CONFIG4 = 0x17;
constexpr std::uint8_t MAP_SIZE = 0x18;
}  // namespace reg

// LOFF field values (documented menu).
enum class LeadOffFreq : std::uint8_t { dc = 0b00, fs_over_4 = 0b01 };
enum class LeadOffCurrent : std::uint8_t {
  i6na = 0b00,
  i24na = 0b01,
  i6ua = 0b10,
  i24ua = 0b11,
};

double lead_off_current_amps(LeadOffCurrent c);
LeadOffCurrent lead_off_current_from_amps(double amps);  // exact menu match required

/// One logical device's register map. Writes to read-only registers are
/// ignored and logged; unknown addresses raise AddressError.
class RegisterFile {
 public:
  RegisterFile();

  std::uint8_t read(std::uint8_t addr) const;
  void write(std::uint8_t addr, std::uint8_t value);

  // Comparator-driven path for the read-only status registers.
  void set_lead_off_status(std::uint8_t statp, std::uint8_t statn);

  // Typed views over the map.
  LeadOffFreq lead_off_freq() const;
  LeadOffCurrent lead_off_current() const;
  void set_lead_off(LeadOffFreq f, LeadOffCurrent c);
  std::uint8_t loff_sensp() const { return regs_[reg::LOFF_SENSP]; }
  std::uint8_t loff_sensn() const { return regs_[reg::LOFF_SENSN]; }
  int channel_gain(int channel) const;       // 0-based, from CHnSET [6:4]
  void set_channel_gain(int channel, int gain);
  bool channel_powered_down(int channel) const;
  bool channel_input_shorted(int channel) const;  // mux = 0b001
  int data_rate() const;                      // decoded from CONFIG1
  void set_data_rate(int rate);
  bool bias_enabled() const;
  void set_bias_enabled(bool on);

  const std::vector<std::string>& log() const { return log_; }

 private:
  std::uint8_t regs_[reg::MAP_SIZE];
  std::vector<std::string> log_;
};

/// High-level acquisition settings; kept in sync with the registers by the
/// engine. channels() = 8 * devices (daisy chain).
struct AcquisitionConfig {
  int rate = 250;        // {250, 500, 1000}
  int gain = 24;         // {1, 2, 4, 6, 8, 12, 24}
  double vref = 4.5;     // volts
  int devices = 1;       // 1..3
  double lead_off_current_a = 24e-9;  // menu {6e-9, 24e-9, 6e-6, 24e-6}
  LeadOffFreq lead_off_freq = LeadOffFreq::dc;

  int channels() const { return devices * 8; }
  double lead_off_amps() const { return lead_off_current_a; }
  void validate() const;
};

void apply_config(RegisterFile& rf, const AcquisitionConfig& cfg);

/// One conversion instant across the whole chain.
struct SampleFrame {
  std::uint32_t status = 0;  // 24-bit word: 0xC nibble, LOFF_STATP, LOFF_STATN, 4 reserved bits
  std::vector<std::int32_t> codes;
  std::uint64_t index = 0;
  double t = 0.0;                     // index / rate exactly
  std::uint32_t saturated_mask = 0;   // engine-side log, bit per channel

  std::uint8_t statp() const { return static_cast<std::uint8_t>((status >> 12) & 0xFF); }
  std::uint8_t statn() const { return static_cast<std::uint8_t>((status >> 4) & 0xFF); }
};

std::uint32_t make_status_word(std::uint8_t statp, std::uint8_t statn);

/// code = clamp(floor(v*gain*(2^23-1)/vref + 0.5), -2^23, 2^23-1).
std::int32_t convert(double volts, int gain, double vref, bool* saturated = nullptr);

/// volts = code * vref / (gain * (2^23-1)); code must be a 24-bit value.
double decode(std::int32_t code, int gain, double vref);

constexpr std::int32_t kCodeMax = 8388607;
constexpr std::int32_t kCodeMin = -8388608;

/// Superposes the lead-off excitation I*Z on one channel. DC mode adds a
/// constant; fs/4 mode a square wave phased to the absolute sample index
/// (+I*Z for index%4 in {0,1}).
Series inject_lead_off(const Series& channel, const ElectrodeModel& electrode,
                       const AcquisitionConfig& cfg, bool enabled, std::uint64_t start_index);

/// Threshold comparator feeding LOFF_STATP/LOFF_STATN: a status bit is set
/// when the measured excitation amplitude on an enabled channel exceeds the
/// threshold (electrode considered detached / high impedance). Channels
/// outside the sense masks always read clear.
void lead_off_comparator(RegisterFile& rf, const std::vector<double>& excitation_amplitude_v,
                         double reference_amplitude_v, double threshold_v);

constexpr double kDefaultLeadOffThresholdV = 1e-3;

}  // namespace ironstream
