#pragma once

// Flat key = value configuration files with dotted sections, e.g.
//
//   duration = 120
//   benign.device_ip = 10.0.0.5
//   flood.0.kind = syn
//
// Blank lines and #-comments are ignored. Unknown keys are rejected so a
// typo names itself in the diagnostic.

#include <cstdint>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "floodwatch/errors.hpp"
#include "floodwatch/packet.hpp"
#include "floodwatch/trafficgen.hpp"

namespace floodwatch {

class Config {
public:
    static Config parse(const std::string& text) {
        Config cfg;
        std::size_t pos = 0;
        std::size_t line_no = 0;
        while (pos <= text.size()) {
            std::size_t eol = text.find('\n', pos);
            if (eol == std::string::npos) eol = text.size();
            std::string line = text.substr(pos, eol - pos);
            pos = eol + 1;
            ++line_no;

            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;

            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw BadConfig("line " + std::to_string(line_no) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw BadConfig("line " + std::to_string(line_no) + ": empty key");
            if (cfg.values_.count(key))
                throw BadConfig("duplicate key '" + key + "'");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw BadConfig("missing key '" + key + "'");
        consumed_.insert(key);
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        return has(key) ? get_string(key) : fallback;
    }

    double get_double(const std::string& key) const {
        const std::string raw = get_string(key);
        char* end = nullptr;
        const double v = std::strtod(raw.c_str(), &end);
        if (end != raw.c_str() + raw.size())
            throw BadConfig("key '" + key + "': not a number: " + raw);
        return v;
    }

    double get_double(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    std::uint64_t get_u64(const std::string& key) const {
        const std::string raw = get_string(key);
        char* end = nullptr;
        const unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
        if (end != raw.c_str() + raw.size())
            throw BadConfig("key '" + key + "': not an integer: " + raw);
        return v;
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        return has(key) ? get_u64(key) : fallback;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string raw = get_string(key);
        if (raw == "true" || raw == "1") return true;
        if (raw == "false" || raw == "0") return false;
        throw BadConfig("key '" + key + "': expected true/false: " + raw);
    }

    Ipv4 get_ip(const std::string& key) const {
        const std::string raw = get_string(key);
        try {
            return Ipv4::parse(raw);
        } catch (const InvalidArgument&) {
            throw BadConfig("key '" + key + "': not an IPv4 address: " + raw);
        }
    }

    // Call after reading the full schema; leftovers are typos.
    void reject_unknown_keys() const {
        for (const auto& [key, value] : values_)
            if (!consumed_.count(key)) throw BadConfig("unknown key '" + key + "'");
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
        while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
        return s.substr(b, e - b);
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
};

inline ScenarioSpec scenario_from_config(const Config& cfg) {
    ScenarioSpec spec;
    spec.duration = cfg.get_double("duration");
    spec.samp = cfg.get_double("samp", 1.0);
    spec.seed = cfg.get_u64("seed");

    BenignProfile& b = spec.benign;
    b.device_ip = cfg.get_ip("benign.device_ip");
    b.server_ip = cfg.get_ip("benign.server_ip");
    b.rate = cfg.get_double("benign.rate", b.rate);
    b.len_mean = cfg.get_double("benign.len_mean", b.len_mean);
    b.len_stddev = cfg.get_double("benign.len_stddev", b.len_stddev);
    b.len_min = static_cast<std::uint32_t>(cfg.get_u64("benign.len_min", b.len_min));
    b.len_max = static_cast<std::uint32_t>(cfg.get_u64("benign.len_max", b.len_max));
    b.duty_cycle = cfg.get_double("benign.duty_cycle", b.duty_cycle);
    b.keepalive_period = cfg.get_double("benign.keepalive_period", b.keepalive_period);
    b.upstream_frac = cfg.get_double("benign.upstream_frac", b.upstream_frac);
    b.device_port = static_cast<std::uint16_t>(cfg.get_u64("benign.device_port", b.device_port));
    b.server_port = static_cast<std::uint16_t>(cfg.get_u64("benign.server_port", b.server_port));

    for (std::size_t i = 0;; ++i) {
        const std::string prefix = "flood." + std::to_string(i) + ".";
        if (!cfg.has(prefix + "kind")) break;
        FloodProfile f;
        const std::string kind = cfg.get_string(prefix + "kind");
        if (kind == "syn")
            f.kind = FloodKind::Syn;
        else if (kind == "icmp")
            f.kind = FloodKind::Icmp;
        else
            throw BadConfig("key '" + prefix + "kind': expected syn or icmp: " + kind);
        f.attacker_ip = cfg.get_ip(prefix + "attacker_ip");
        f.target_ip = cfg.has(prefix + "target_ip") ? cfg.get_ip(prefix + "target_ip")
                                                    : b.device_ip;
        f.rate = cfg.get_double(prefix + "rate");
        f.start = cfg.get_double(prefix + "start");
        f.duration = cfg.get_double(prefix + "duration");
        f.randomize_src_port = cfg.get_bool(prefix + "randomize_src_port", true);
        spec.floods.push_back(f);
    }

    cfg.reject_unknown_keys();
    if (!(spec.duration > 0.0)) throw BadConfig("key 'duration': must be positive");
    if (!(spec.samp > 0.0)) throw BadConfig("key 'samp': must be positive");
    return spec;
}

} // namespace floodwatch
