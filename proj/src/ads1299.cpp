// SPDX-License-Identifier: Apache-2.0

#include "ironstream/ads1299.hpp"

#include <cmath>
#include <sstream>

#include "ironstream/kernels.hpp"

namespace ironstream {

double lead_off_current_amps(LeadOffCurrent c) {
  switch (c) {
    case LeadOffCurrent::i6na: return 6e-9;
    case LeadOffCurrent::i24na: return 24e-9;
    case LeadOffCurrent::i6ua: return 6e-6;
    case LeadOffCurrent::i24ua: return 24e-6;
  }
  throw ConfigError("invalid lead-off current code");
}

LeadOffCurrent lead_off_current_from_amps(double amps) {
  if (amps == 6e-9) return LeadOffCurrent::i6na;
  if (amps == 24e-9) return LeadOffCurrent::i24na;
  if (amps == 6e-6) return LeadOffCurrent::i6ua;
  if (amps == 24e-6) return LeadOffCurrent::i24ua;
  throw ConfigError("lead-off current must be one of {6e-9, 24e-9, 6e-6, 24e-6} A");
}

namespace {

constexpr std::uint8_t kResetValues[reg::MAP_SIZE] = {
    0x3E,  // ID
    0x96,  // CONFIG1: rate bits 0b110 = 250 SPS
    0xC0,  // CONFIG2
    0x60,  // CONFIG3: bias off at reset
    0x00,  // LOFF: DC, 6 nA
    0x60, 0x60, 0x60, 0x60, 0x60, 0x60, 0x60, 0x60,  // CHnSET: gain 24, mux normal
    0x00,  // BIAS_SENSP
    0x00,  // BIAS_SENSN
    0x00,  // LOFF_SENSP
    0x00,  // LOFF_SENSN
    0x00,  // LOFF_FLIP
    0x00,  // LOFF_STATP (RO)
    0x00,  // LOFF_STATN (RO)
    0x0F,  // GPIO
    0x00,  // MISC1
    0x00,  // MISC2
    0x00,  // CONFIG4
};

bool is_read_only(std::uint8_t addr) {
  return addr == reg::ID || addr == reg::LOFF_STATP || addr == reg::LOFF_STATN;
}

int gain_from_bits(std::uint8_t bits) {
  switch (bits & 0x07) {
    case 0b000: return 1;
    case 0b001: return 2;
    case 0b010: return 4;
    case 0b011: return 6;
    case 0b100: return 8;
    case 0b101: return 12;
    case 0b110: return 24;
    default: throw ConfigError("reserved gain bits 0b111");
  }
}

std::uint8_t bits_from_gain(int gain) {
  switch (gain) {
    case 1: return 0b000;
    case 2: return 0b001;
    case 4: return 0b010;
    case 6: return 0b011;
    case 8: return 0b100;
    case 12: return 0b101;
    case 24: return 0b110;
    default: throw ConfigError("gain must be one of {1,2,4,6,8,12,24}");
  }
}

}  // namespace

RegisterFile::RegisterFile() {
  for (std::uint8_t a = 0; a < reg::MAP_SIZE; ++a) regs_[a] = kResetValues[a];
}

std::uint8_t RegisterFile::read(std::uint8_t addr) const {
  if (addr >= reg::MAP_SIZE) {
    std::ostringstream os;
    os << "register read outside map: 0x" << std::hex << static_cast<int>(addr);
    throw AddressError(os.str());
  }
  return regs_[addr];
}

void RegisterFile::write(std::uint8_t addr, std::uint8_t value) {
  if (addr >= reg::MAP_SIZE) {
    std::ostringstream os;
    os << "register write outside map: 0x" << std::hex << static_cast<int>(addr);
    throw AddressError(os.str());
  }
  if (is_read_only(addr)) {
    std::ostringstream os;
    os << "ignored write to read-only register 0x" << std::hex << static_cast<int>(addr);
    log_.push_back(os.str());
    return;
  }
  regs_[addr] = value;
}

void RegisterFile::set_lead_off_status(std::uint8_t statp, std::uint8_t statn) {
  regs_[reg::LOFF_STATP] = statp;
  regs_[reg::LOFF_STATN] = statn;
}

LeadOffFreq RegisterFile::lead_off_freq() const {
  const std::uint8_t bits = regs_[reg::LOFF] & 0x03;
  if (bits == 0b00) return LeadOffFreq::dc;
  if (bits == 0b01) return LeadOffFreq::fs_over_4;
  throw ConfigError("LOFF FLEAD_OFF bits 0b10/0b11 are reserved");
}

LeadOffCurrent RegisterFile::lead_off_current() const {
  return static_cast<LeadOffCurrent>((regs_[reg::LOFF] >> 2) & 0x03);
}

void RegisterFile::set_lead_off(LeadOffFreq f, LeadOffCurrent c) {
  regs_[reg::LOFF] = static_cast<std::uint8_t>((regs_[reg::LOFF] & 0xF0) |
                                               (static_cast<std::uint8_t>(c) << 2) |
                                               static_cast<std::uint8_t>(f));
}

int RegisterFile::channel_gain(int channel) const {
  if (channel < 0 || channel > 7) throw AddressError("channel index out of [0,7]");
  return gain_from_bits(static_cast<std::uint8_t>(regs_[reg::CH1SET + channel] >> 4));
}

void RegisterFile::set_channel_gain(int channel, int gain) {
  if (channel < 0 || channel > 7) throw AddressError("channel index out of [0,7]");
  const std::uint8_t addr = static_cast<std::uint8_t>(reg::CH1SET + channel);
  regs_[addr] = static_cast<std::uint8_t>((regs_[addr] & 0x8F) | (bits_from_gain(gain) << 4));
}

bool RegisterFile::channel_powered_down(int channel) const {
  if (channel < 0 || channel > 7) throw AddressError("channel index out of [0,7]");
  return (regs_[reg::CH1SET + channel] & 0x80) != 0;
}

bool RegisterFile::channel_input_shorted(int channel) const {
  if (channel < 0 || channel > 7) throw AddressError("channel index out of [0,7]");
  return (regs_[reg::CH1SET + channel] & 0x07) == 0b001;
}

int RegisterFile::data_rate() const {
  switch (regs_[reg::CONFIG1] & 0x07) {
    case 0b110: return 250;
    case 0b101: return 500;
    case 0b100: return 1000;
    default: throw ConfigError("CONFIG1 data-rate bits outside the supported menu");
  }
}

void RegisterFile::set_data_rate(int rate) {
  std::uint8_t bits;
  switch (rate) {
    case 250: bits = 0b110; break;
    case 500: bits = 0b101; break;
    case 1000: bits = 0b100; break;
    default: throw ConfigError("rate must be one of {250, 500, 1000}");
  }
  regs_[reg::CONFIG1] = static_cast<std::uint8_t>((regs_[reg::CONFIG1] & 0xF8) | bits);
}

bool RegisterFile::bias_enabled() const { return (regs_[reg::CONFIG3] & 0x04) != 0; }

void RegisterFile::set_bias_enabled(bool on) {
  if (on)
    regs_[reg::CONFIG3] |= 0x04;
  else
    regs_[reg::CONFIG3] &= static_cast<std::uint8_t>(~0x04);
}

void AcquisitionConfig::validate() const {
  if (rate != 250 && rate != 500 && rate != 1000)
    throw ConfigError("rate must be one of {250, 500, 1000}");
  switch (gain) {
    case 1: case 2: case 4: case 6: case 8: case 12: case 24: break;
    default: throw ConfigError("gain must be one of {1,2,4,6,8,12,24}");
  }
  if (!(vref > 0.0)) throw ConfigError("vref must be > 0");
  if (devices < 1 || devices > 3) throw ConfigError("devices must be 1..3 (8/16/24 channels)");
}

void apply_config(RegisterFile& rf, const AcquisitionConfig& cfg) {
  cfg.validate();
  rf.set_data_rate(cfg.rate);
  for (int ch = 0; ch < 8; ++ch) rf.set_channel_gain(ch, cfg.gain);
  rf.set_lead_off(cfg.lead_off_freq, cfg.lead_off_current);
}

std::uint32_t make_status_word(std::uint8_t statp, std::uint8_t statn) {
  return (0xCu << 20) | (static_cast<std::uint32_t>(statp) << 12) |
         (static_cast<std::uint32_t>(statn) << 4);
}

std::int32_t convert(double volts, int gain, double vref, bool* saturated) {
  std::int32_t code;
  std::uint8_t sat = 0;
  kernels::convert_codes(&volts, &code, &sat, 1, static_cast<double>(gain), vref);
  if (saturated) *saturated = sat != 0;
  return code;
}

double decode(std::int32_t code, int gain, double vref) {
  if (code < kCodeMin || code > kCodeMax) {
    std::ostringstream os;
    os << "code " << code << " outside 24-bit signed range";
    throw CodecError(os.str());
  }
  double v;
  kernels::decode_codes(&code, &v, 1, static_cast<double>(gain), vref);
  return v;
}

Series inject_lead_off(const Series& channel, const ElectrodeModel& electrode,
                       const AcquisitionConfig& cfg, bool enabled, std::uint64_t start_index) {
  Series out = channel;
  if (!enabled) return out;
  const double excitation = cfg.lead_off_amps() * electrode.contact_impedance_ohms;
  if (cfg.lead_off_freq == LeadOffFreq::dc) {
    for (auto& v : out) v += excitation;
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::uint64_t phase = (start_index + i) % 4;
      out[i] += phase < 2 ? excitation : -excitation;
    }
  }
  return out;
}

void lead_off_comparator(RegisterFile& rf, const std::vector<double>& excitation_amplitude_v,
                         double reference_amplitude_v, double threshold_v) {
  if (!(threshold_v > 0.0)) throw ConfigError("lead-off threshold must be > 0");
  std::uint8_t statp = 0;
  std::uint8_t statn = 0;
  const std::uint8_t sensp = rf.loff_sensp();
  const std::uint8_t sensn = rf.loff_sensn();
  const std::size_t n = std::min<std::size_t>(excitation_amplitude_v.size(), 8);
  for (std::size_t ch = 0; ch < n; ++ch) {
    if ((sensp & (1u << ch)) && excitation_amplitude_v[ch] > threshold_v)
      statp |= static_cast<std::uint8_t>(1u << ch);
  }
  for (std::size_t ch = 0; ch < 8; ++ch) {
    if ((sensn & (1u << ch)) && reference_amplitude_v > threshold_v)
      statn |= static_cast<std::uint8_t>(1u << ch);
  }
  rf.set_lead_off_status(statp, statn);
}

}  // namespace ironstream
