#include "trgnss/rinex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <set>

#include "trgnss/constants.hpp"

namespace trgnss {

namespace {

std::string field(const std::string& line, std::size_t pos, std::size_t len) {
  if (pos >= line.size()) return {};
  return line.substr(pos, len);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

/// Parses a whole field as a number; blank fields and trailing garbage give nullopt.
std::optional<double> parse_double(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  for (char c : t) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E' ||
          c == 'D' || c == 'd')) {
      return std::nullopt;
    }
  }
  std::string s = t;
  std::replace(s.begin(), s.end(), 'D', 'E');
  std::replace(s.begin(), s.end(), 'd', 'E');
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> parse_int(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t.size() > 9) return std::nullopt;
  std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
  if (i == t.size()) return std::nullopt;
  for (std::size_t k = i; k < t.size(); ++k)
    if (!std::isdigit(static_cast<unsigned char>(t[k]))) return std::nullopt;
  return std::atoi(t.c_str());
}

bool getline_clean(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

enum class Slot { Code, Phase, Doppler, Strength, Other };

Slot classify(const std::string& code) {
  if (code.size() != 3 || (code[1] != '1' && code[1] != '2')) return Slot::Other;
  // Band 1 for GPS/GAL/GLO, band 2 (B1I) for BeiDou under RINEX 3.04 naming.
  switch (code[0]) {
    case 'C': return Slot::Code;
    case 'L': return Slot::Phase;
    case 'D': return Slot::Doppler;
    case 'S': return Slot::Strength;
    default: return Slot::Other;
  }
}

bool accepted_code(Constellation c, const std::string& code) {
  if (code.size() != 3) return false;
  if (c == Constellation::BDS) return code[1] == '2' && code[2] == 'I';
  return code[1] == '1' && code[2] == 'C';
}

double wavelength_of(Constellation c, int channel) {
  switch (c) {
    case Constellation::GPS: return kSpeedOfLight / kFreqGpsL1;
    case Constellation::GAL: return kSpeedOfLight / kFreqGalE1;
    case Constellation::BDS: return kSpeedOfLight / kFreqBdsB1I;
    case Constellation::GLO: return kSpeedOfLight / (kFreqGloG1Base + channel * kFreqGloG1Step);
  }
  return 0.0;
}

std::string header_line(const std::string& content, const std::string& label) {
  std::string s = content;
  s.resize(60, ' ');
  return s + label;
}

std::string format_value(double v) {
  if (!std::isfinite(v) || v >= 9999999999.9995 || v <= -999999999.9995) {
    throw Error(ErrorCode::InvalidArgument, "observation value does not fit F14.3");
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%14.3f", v);
  return buf;
}

}  // namespace

std::vector<std::string> default_observation_codes(Constellation c) {
  if (c == Constellation::BDS) return {"C2I", "L2I", "D2I", "S2I"};
  return {"C1C", "L1C", "D1C", "S1C"};
}

RinexObsFile parse_rinex_obs(std::istream& in) {
  RinexObsFile out;
  RinexHeader& h = out.header;
  std::string line;
  int line_no = 0;
  bool end_of_header = false;
  bool have_version = false;
  std::optional<Constellation> pending_system;  // SYS / # / OBS TYPES continuation
  int pending_count = 0;
  int glonass_pending = 0;

  while (getline_clean(in, line)) {
    ++line_no;
    const std::string label = trim(field(line, 60, 20));
    if (label == "END OF HEADER") {
      end_of_header = true;
      break;
    }
    if (label == "RINEX VERSION / TYPE") {
      const auto v = parse_double(field(line, 0, 9));
      if (!v || *v < 3.0 || *v >= 4.0) {
        throw Error(ErrorCode::MalformedHeader, "line " + std::to_string(line_no) + ": unsupported RINEX version");
      }
      const std::string type = trim(field(line, 20, 1));
      if (type != "O") throw Error(ErrorCode::MalformedHeader, "line " + std::to_string(line_no) + ": not an observation file");
      h.version = *v;
      have_version = true;
    } else if (label == "MARKER NAME") {
      h.marker_name = trim(field(line, 0, 60));
    } else if (label == "APPROX POSITION XYZ") {
      const auto x = parse_double(field(line, 0, 14));
      const auto y = parse_double(field(line, 14, 14));
      const auto z = parse_double(field(line, 28, 14));
      if (x && y && z) h.approx_position = EcefVector(*x, *y, *z);
    } else if (label == "INTERVAL") {
      if (auto v = parse_double(field(line, 0, 10)); v && *v > 0.0) h.interval = *v;
    } else if (label == "TIME OF FIRST OBS") {
      const auto y = parse_int(field(line, 0, 6));
      const auto mo = parse_int(field(line, 6, 6));
      const auto d = parse_int(field(line, 12, 6));
      const auto hh = parse_int(field(line, 18, 6));
      const auto mi = parse_int(field(line, 24, 6));
      const auto s = parse_double(field(line, 30, 13));
      if (y && mo && d && hh && mi && s) h.first_observation = from_calendar({*y, *mo, *d, *hh, *mi, *s});
    } else if (label == "SYS / # / OBS TYPES") {
      const char sys = line.empty() ? ' ' : line[0];
      int start = 7;
      if (sys != ' ') {
        const auto c = constellation_from_char(sys);
        const auto n = parse_int(field(line, 3, 3));
        if (!n || *n < 0 || *n > 99) {
          throw Error(ErrorCode::MalformedHeader, "line " + std::to_string(line_no) + ": bad observation type count");
        }
        pending_system = c;  // unsupported systems leave this empty, skipping their continuation lines
        pending_count = *n;
        if (!c) continue;
        h.observation_codes[*c].clear();
      }
      if (!pending_system) continue;
      auto& codes = h.observation_codes[*pending_system];
      for (int k = 0; k < 13 && static_cast<int>(codes.size()) < pending_count; ++k) {
        const std::string code = trim(field(line, static_cast<std::size_t>(start + 4 * k), 3));
        if (code.empty()) break;
        codes.push_back(code);
      }
    } else if (label == "GLONASS SLOT / FRQ #") {
      std::size_t pos = 4;
      if (!trim(field(line, 0, 3)).empty()) {
        const auto n = parse_int(field(line, 0, 3));
        glonass_pending = n ? std::clamp(*n, 0, 99) : 0;
      }
      for (int k = 0; k < 8 && glonass_pending > 0; ++k, pos += 7) {
        const std::string sat = field(line, pos, 3);
        const auto ch = parse_int(field(line, pos + 4, 2));
        if (sat.size() < 3 || sat[0] != 'R' || !ch) break;
        const auto prn = parse_int(sat.substr(1, 2));
        if (prn && *ch >= -7 && *ch <= 13) h.glonass_channels[*prn] = *ch;
        --glonass_pending;
      }
    }
  }
  if (!end_of_header) throw Error(ErrorCode::MalformedHeader, "missing END OF HEADER");
  if (!have_version) throw Error(ErrorCode::MalformedHeader, "missing RINEX VERSION / TYPE");
  for (const auto& [c, codes] : h.observation_codes) {
    if (codes.empty()) throw Error(ErrorCode::MalformedHeader, "no observation codes for " + std::string(to_string(c)));
  }

  // Index of each wanted observable per system.
  struct Layout {
    int code = -1, phase = -1, doppler = -1, strength = -1;
    std::size_t count = 0;
  };
  std::map<Constellation, Layout> layouts;
  for (const auto& [c, codes] : h.observation_codes) {
    Layout l;
    l.count = codes.size();
    for (std::size_t k = 0; k < codes.size(); ++k) {
      if (!accepted_code(c, codes[k])) continue;
      const int idx = static_cast<int>(k);
      switch (classify(codes[k])) {
        case Slot::Code: if (l.code < 0) l.code = idx; break;
        case Slot::Phase: if (l.phase < 0) l.phase = idx; break;
        case Slot::Doppler: if (l.doppler < 0) l.doppler = idx; break;
        case Slot::Strength: if (l.strength < 0) l.strength = idx; break;
        case Slot::Other: break;
      }
    }
    layouts[c] = l;
  }

  bool warned_glonass = false;
  const Epoch* previous = nullptr;
  std::optional<std::string> carried;  // epoch line that interrupted a short epoch
  int carried_line = 0;

  auto next_line = [&](std::string& l, int& no) {
    if (carried) {
      l = *carried;
      no = carried_line;
      carried.reset();
      return true;
    }
    if (!getline_clean(in, l)) return false;
    no = ++line_no;
    return true;
  };

  std::string rec;
  int rec_no = 0;
  while (next_line(rec, rec_no)) {
    if (trim(rec).empty()) continue;
    if (rec[0] != '>') {
      out.warnings.push_back({ErrorCode::MalformedEpoch, rec_no, "expected epoch record"});
      continue;
    }
    const auto y = parse_int(field(rec, 2, 4));
    const auto mo = parse_int(field(rec, 7, 2));
    const auto d = parse_int(field(rec, 10, 2));
    const auto hh = parse_int(field(rec, 13, 2));
    const auto mi = parse_int(field(rec, 16, 2));
    const auto sec = parse_double(field(rec, 18, 11));
    const auto flag = parse_int(field(rec, 31, 1));
    const auto count = parse_int(field(rec, 32, 3));
    if (!flag || !count || *count < 0) {
      out.warnings.push_back({ErrorCode::MalformedEpoch, rec_no, "unreadable epoch flag or satellite count"});
      continue;
    }
    if (*flag >= 2) {
      // Event records: `count` special lines follow.
      std::string skip;
      int skip_no = 0;
      for (int k = 0; k < *count; ++k) {
        if (!next_line(skip, skip_no)) break;
        if (!skip.empty() && skip[0] == '>') {
          carried = skip;
          carried_line = skip_no;
          break;
        }
      }
      continue;
    }
    std::optional<GpsTime> time;
    if (y && mo && d && hh && mi && sec) time = from_calendar({*y, *mo, *d, *hh, *mi, *sec});

    Epoch epoch;
    bool bad = !time;
    std::string reason = bad ? "unreadable epoch time" : "";
    int bad_line = rec_no;
    int read = 0;
    std::string obs_line;
    int obs_no = 0;
    for (; read < *count; ++read) {
      if (!next_line(obs_line, obs_no)) break;
      if (!obs_line.empty() && obs_line[0] == '>') {
        carried = obs_line;
        carried_line = obs_no;
        break;
      }
      if (bad) continue;
      const auto sat = parse_satellite_id(field(obs_line, 0, 3));
      if (!sat) {
        bad = true;
        reason = "bad satellite identifier";
        bad_line = obs_no;
        continue;
      }
      auto lit = layouts.find(sat->constellation);
      if (lit == layouts.end()) continue;
      const Layout& l = lit->second;
      if (l.code < 0 || l.phase < 0 || l.doppler < 0) continue;

      struct Value {
        std::optional<double> v;
        int lli = 0;
        int ssi = 0;
      };
      auto read_value = [&](int idx, bool& ok) {
        Value out_value;
        const std::size_t pos = 3 + 16 * static_cast<std::size_t>(idx);
        const std::string text = field(obs_line, pos, 14);
        if (!trim(text).empty()) {
          out_value.v = parse_double(text);
          if (!out_value.v) ok = false;
        }
        const std::string lli = field(obs_line, pos + 14, 1);
        const std::string ssi = field(obs_line, pos + 15, 1);
        if (!lli.empty() && lli != " ") {
          if (!std::isdigit(static_cast<unsigned char>(lli[0]))) ok = false;
          else out_value.lli = lli[0] - '0';
        }
        if (!ssi.empty() && ssi != " ") {
          if (!std::isdigit(static_cast<unsigned char>(ssi[0]))) ok = false;
          else out_value.ssi = ssi[0] - '0';
        }
        return out_value;
      };
      bool ok = true;
      const Value code = read_value(l.code, ok);
      const Value phase = read_value(l.phase, ok);
      const Value doppler = read_value(l.doppler, ok);
      const Value strength = l.strength >= 0 ? read_value(l.strength, ok) : Value{};
      if (!ok) {
        bad = true;
        reason = "unreadable observation field";
        bad_line = obs_no;
        continue;
      }
      if (!code.v || !phase.v || !doppler.v) continue;
      if (std::any_of(epoch.observations.begin(), epoch.observations.end(),
                      [&](const Observation& o) { return o.sat == *sat; })) {
        bad = true;
        reason = "duplicate satellite";
        bad_line = obs_no;
        continue;
      }

      Observation obs;
      obs.sat = *sat;
      obs.pseudorange = *code.v;
      obs.carrier_phase = *phase.v;
      obs.doppler = *doppler.v;
      obs.loss_of_lock = (phase.lli & 1) != 0;
      obs.snr = strength.v ? *strength.v : 6.0 * (phase.ssi ? phase.ssi : code.ssi);
      int channel = 0;
      if (sat->constellation == Constellation::GLO) {
        if (auto it = h.glonass_channels.find(sat->prn); it != h.glonass_channels.end()) {
          channel = it->second;
        } else if (!warned_glonass) {
          warned_glonass = true;
          out.warnings.push_back({ErrorCode::MalformedHeader, obs_no, "no GLONASS frequency channel; using 0"});
        }
      }
      obs.wavelength = wavelength_of(sat->constellation, channel);
      const Observation* before = previous ? previous->find(*sat) : nullptr;
      obs.lock_count = (before && !obs.loss_of_lock) ? before->lock_count + 1 : 0;
      epoch.observations.push_back(obs);
    }
    if (read < *count) {
      out.warnings.push_back({ErrorCode::MalformedEpoch, rec_no,
                              "epoch announced " + std::to_string(*count) + " satellites, found " +
                                  std::to_string(read)});
      continue;
    }
    if (bad) {
      out.warnings.push_back({ErrorCode::MalformedEpoch, bad_line, reason});
      continue;
    }
    if (!out.epochs.empty() && !(out.epochs.back().time < *time)) {
      out.warnings.push_back({ErrorCode::MalformedEpoch, rec_no, "epoch time not increasing"});
      continue;
    }
    epoch.time = *time;
    std::sort(epoch.observations.begin(), epoch.observations.end(),
              [](const Observation& a, const Observation& b) { return a.sat < b.sat; });
    out.epochs.push_back(std::move(epoch));
    previous = &out.epochs.back();
  }
  return out;
}

RinexHeader make_rinex_header(const std::vector<Epoch>& epochs, const std::map<int, int>& glonass_channels) {
  RinexHeader h;
  h.marker_name = "TRGNSS";
  std::set<Constellation> systems;
  for (const auto& e : epochs)
    for (const auto& o : e.observations) systems.insert(o.sat.constellation);
  if (systems.empty()) systems.insert(Constellation::GPS);
  for (auto c : systems) h.observation_codes[c] = default_observation_codes(c);
  if (epochs.size() >= 2) h.interval = epochs[1].time - epochs[0].time;
  if (!epochs.empty()) h.first_observation = epochs.front().time;
  h.glonass_channels = glonass_channels;
  return h;
}

void write_rinex_obs(const RinexHeader& header, const std::vector<Epoch>& epochs, std::ostream& out) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%9.2f%11s%-20s%-20s", header.version, "", "OBSERVATION DATA", "M");
  out << header_line(buf, "RINEX VERSION / TYPE") << '\n';
  out << header_line("trgnss", "PGM / RUN BY / DATE") << '\n';
  out << header_line(header.marker_name, "MARKER NAME") << '\n';
  if (header.approx_position) {
    const auto& p = *header.approx_position;
    std::snprintf(buf, sizeof buf, "%14.4f%14.4f%14.4f", p.x(), p.y(), p.z());
    out << header_line(buf, "APPROX POSITION XYZ") << '\n';
  }
  for (const auto& [c, codes] : header.observation_codes) {
    for (std::size_t k = 0; k < codes.size() || k == 0; k += 13) {
      std::string s;
      if (k == 0) {
        std::snprintf(buf, sizeof buf, "%c  %3zu", system_char(c), codes.size());
        s = buf;
      } else {
        s = std::string(6, ' ');
      }
      for (std::size_t j = k; j < std::min(codes.size(), k + 13); ++j) s += " " + codes[j];
      out << header_line(s, "SYS / # / OBS TYPES") << '\n';
      if (codes.empty()) break;
    }
  }
  if (header.interval) {
    std::snprintf(buf, sizeof buf, "%10.3f", *header.interval);
    out << header_line(buf, "INTERVAL") << '\n';
  }
  if (header.first_observation) {
    const CalendarTime c = to_calendar(*header.first_observation);
    std::snprintf(buf, sizeof buf, "%6d%6d%6d%6d%6d%13.7f     GPS", c.year, c.month, c.day, c.hour, c.minute, c.second);
    out << header_line(buf, "TIME OF FIRST OBS") << '\n';
  }
  if (!header.glonass_channels.empty()) {
    std::vector<std::pair<int, int>> slots(header.glonass_channels.begin(), header.glonass_channels.end());
    for (std::size_t k = 0; k < slots.size(); k += 8) {
      std::string s;
      if (k == 0) {
        std::snprintf(buf, sizeof buf, "%3zu ", slots.size());
        s = buf;
      } else {
        s = "    ";
      }
      for (std::size_t j = k; j < std::min(slots.size(), k + 8); ++j) {
        std::snprintf(buf, sizeof buf, "R%02d %2d ", slots[j].first, slots[j].second);
        s += buf;
      }
      out << header_line(s, "GLONASS SLOT / FRQ #") << '\n';
    }
  }
  out << header_line("", "END OF HEADER") << '\n';

  for (const auto& e : epochs) {
    const CalendarTime c = to_calendar(e.time);
    std::snprintf(buf, sizeof buf, "> %04d %02d %02d %02d %02d%11.7f  0%3zu", c.year, c.month, c.day, c.hour, c.minute,
                  c.second, e.observations.size());
    out << buf << '\n';
    for (const auto& o : e.observations) {
      auto it = header.observation_codes.find(o.sat.constellation);
      if (it == header.observation_codes.end()) {
        throw Error(ErrorCode::InvalidArgument, "header lacks observation codes for " + to_string(o.sat));
      }
      const int ssi = std::clamp(static_cast<int>(o.snr / 6.0), 1, 9);
      std::string s = to_string(o.sat);
      for (const auto& code : it->second) {
        double v = 0.0;
        bool known = accepted_code(o.sat.constellation, code);
        const Slot slot = known ? classify(code) : Slot::Other;
        switch (slot) {
          case Slot::Code: v = o.pseudorange; break;
          case Slot::Phase: v = o.carrier_phase; break;
          case Slot::Doppler: v = o.doppler; break;
          case Slot::Strength: v = o.snr; break;
          case Slot::Other: known = false; break;
        }
        if (!known) {
          s += std::string(16, ' ');
          continue;
        }
        s += format_value(v);
        s += (slot == Slot::Phase && o.loss_of_lock) ? '1' : ' ';
        s += slot == Slot::Strength ? ' ' : static_cast<char>('0' + ssi);
      }
      while (!s.empty() && s.back() == ' ') s.pop_back();
      out << s << '\n';
    }
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing RINEX observations");
}

}  // namespace trgnss
