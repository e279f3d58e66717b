#pragma once

// Deterministic synthetic traffic: camera-like benign TCP between a device
// and its server (Poisson arrivals, truncated-normal lengths, periodic
// keep-alives, optional on/off duty cycle) plus SYN and ICMP floods at a
// fixed rate with +-10% per-gap jitter. Identical spec and seed give a
// byte-identical capture.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "floodwatch/errors.hpp"
#include "floodwatch/features.hpp"
#include "floodwatch/packet.hpp"
#include "floodwatch/pcap.hpp"
#include "floodwatch/rng.hpp"

namespace floodwatch {

struct BenignProfile {
    Ipv4 device_ip;
    Ipv4 server_ip;
    double rate = 50.0; // mean packets per second
    double len_mean = 180.0;
    double len_stddev = 120.0;
    std::uint32_t len_min = 54;
    std::uint32_t len_max = 1000;
    double duty_cycle = 1.0;        // active fraction of each 10 s cycle
    double keepalive_period = 5.0;  // seconds; first exchange at t = 0
    double upstream_frac = 0.7;     // device -> server share of data packets
    std::uint16_t device_port = 46000;
    std::uint16_t server_port = 8554;
};

enum class FloodKind : int { Syn = 0, Icmp = 1 };

struct FloodProfile {
    Ipv4 attacker_ip;
    Ipv4 target_ip;
    FloodKind kind = FloodKind::Syn;
    double rate = 2000.0; // packets per second
    double start = 0.0;
    double duration = 0.0;
    bool randomize_src_port = true;
};

struct ScenarioSpec {
    double duration = 120.0;
    double samp = 1.0; // window length used for the ground-truth labels
    BenignProfile benign;
    std::vector<FloodProfile> floods;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::uint32_t truncated_normal_length(Xoshiro256& rng, const BenignProfile& p) {
    for (int i = 0; i < 100; ++i) {
        const double draw = rng.normal(p.len_mean, p.len_stddev);
        if (draw >= p.len_min && draw <= p.len_max) return static_cast<std::uint32_t>(draw);
    }
    return std::clamp(static_cast<std::uint32_t>(p.len_mean), p.len_min, p.len_max);
}

inline PacketRecord tcp_packet(double t, Ipv4 src, Ipv4 dst, std::uint16_t sport,
                               std::uint16_t dport, std::uint8_t flags, std::uint32_t length) {
    PacketRecord rec;
    rec.timestamp = canonical_timestamp(t);
    rec.src_ip = src;
    rec.dst_ip = dst;
    rec.protocol = ProtocolKind::Tcp;
    rec.ip_protocol = 6;
    rec.src_port = sport;
    rec.dst_port = dport;
    rec.tcp_flags = flags;
    rec.length = std::max<std::uint32_t>(length, 54);
    return rec;
}

} // namespace detail

inline std::vector<PacketRecord> gen_benign(const BenignProfile& profile, double duration,
                                            std::uint64_t seed) {
    if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
    Xoshiro256 rng(seed);
    std::vector<PacketRecord> out;
    out.reserve(static_cast<std::size_t>(profile.rate * duration * 1.2) + 16);

    // Keep-alive exchange on a fixed schedule; anchoring the first pair at
    // t = 0 pins the capture origin, so windows tile on whole seconds.
    for (double t = 0.0; t < duration; t += profile.keepalive_period) {
        out.push_back(detail::tcp_packet(t, profile.device_ip, profile.server_ip,
                                         profile.device_port, profile.server_port,
                                         tcpflag::kAck, 54));
        out.push_back(detail::tcp_packet(t + 0.002, profile.server_ip, profile.device_ip,
                                         profile.server_port, profile.device_port,
                                         tcpflag::kAck, 54));
    }

    // Poisson data stream; with duty < 1 the arrivals squeeze into the
    // active prefix of each 10 s cycle at a proportionally higher rate.
    const double cycle = 10.0;
    const double duty = std::clamp(profile.duty_cycle, 0.01, 1.0);
    const double active_rate = profile.rate / duty;
    for (double cycle_start = 0.0; cycle_start < duration; cycle_start += cycle) {
        const double active_end = std::min({cycle_start + cycle * duty, duration});
        double t = cycle_start;
        for (;;) {
            t += rng.exponential(active_rate);
            if (t >= active_end) break;
            const bool upstream = rng.uniform() < profile.upstream_frac;
            const std::uint32_t length = detail::truncated_normal_length(rng, profile);
            if (upstream)
                out.push_back(detail::tcp_packet(t, profile.device_ip, profile.server_ip,
                                                 profile.device_port, profile.server_port,
                                                 tcpflag::kPsh | tcpflag::kAck, length));
            else
                out.push_back(detail::tcp_packet(t, profile.server_ip, profile.device_ip,
                                                 profile.server_port, profile.device_port,
                                                 tcpflag::kAck, length));
        }
    }

    std::stable_sort(out.begin(), out.end(), [](const PacketRecord& a, const PacketRecord& b) {
        return a.timestamp < b.timestamp;
    });
    return out;
}

inline std::vector<PacketRecord> gen_flood(const FloodProfile& profile, std::uint64_t seed) {
    if (!(profile.rate > 0.0)) throw InvalidArgument("flood rate must be positive");
    if (!(profile.duration > 0.0)) throw InvalidArgument("flood duration must be positive");

    Xoshiro256 rng(seed);
    std::vector<PacketRecord> out;
    out.reserve(static_cast<std::size_t>(profile.rate * profile.duration) + 16);

    const double mean_gap = 1.0 / profile.rate;
    const double end = profile.start + profile.duration;
    double t = profile.start;
    while (true) {
        t += mean_gap * rng.uniform(0.9, 1.1); // hping3-like fixed rate with jitter
        if (t >= end) break;
        if (profile.kind == FloodKind::Syn) {
            const std::uint16_t sport =
                profile.randomize_src_port
                    ? static_cast<std::uint16_t>(1024 + rng.uniform_u64(64512))
                    : 4321;
            out.push_back(detail::tcp_packet(t, profile.attacker_ip, profile.target_ip, sport, 80,
                                             tcpflag::kSyn, 54));
        } else {
            PacketRecord rec;
            rec.timestamp = canonical_timestamp(t);
            rec.src_ip = profile.attacker_ip;
            rec.dst_ip = profile.target_ip;
            rec.protocol = ProtocolKind::Icmp;
            rec.ip_protocol = 1;
            rec.icmp_type = 8; // echo request
            rec.length = 98;
            out.push_back(rec);
        }
    }
    return out;
}

struct GroundTruthRow {
    double window_start = 0.0;
    ClassLabel label = ClassLabel::Normal;
};

struct GeneratedScenario {
    std::vector<std::uint8_t> pcap_bytes;
    std::vector<PacketRecord> records;
    std::vector<GroundTruthRow> ground_truth;
};

// Merges the benign stream with every flood, emits the capture, and labels
// each samp-window with the same attacker-evidence rule the feature module
// applies, so the two always agree.
inline GeneratedScenario compose_scenario(const ScenarioSpec& spec) {
    for (const FloodProfile& flood : spec.floods)
        if (flood.start < 0.0 || flood.start + flood.duration > spec.duration)
            throw BadConfig("flood interval outside the scenario duration");

    GeneratedScenario out;
    out.records = gen_benign(spec.benign, spec.duration, derive_seed(spec.seed, 0));
    for (std::size_t i = 0; i < spec.floods.size(); ++i) {
        const std::vector<PacketRecord> flood =
            gen_flood(spec.floods[i], derive_seed(spec.seed, i + 1));
        out.records.insert(out.records.end(), flood.begin(), flood.end());
    }
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const PacketRecord& a, const PacketRecord& b) {
                         return a.timestamp < b.timestamp;
                     });

    out.pcap_bytes = write_pcap(out.records);

    const std::vector<FlowWindow> windows =
        windowize(out.records, spec.benign.device_ip, spec.samp);
    for (const FlowWindow& w : windows) {
        detail::AttackTally tally;
        for (const PacketRecord& p : w.packets) {
            for (const FloodProfile& flood : spec.floods) {
                if (p.src_ip == flood.attacker_ip) {
                    tally.add(p);
                    break;
                }
            }
        }
        out.ground_truth.push_back({w.start_time, tally.label()});
    }
    return out;
}

inline std::string ground_truth_to_csv(std::span<const GroundTruthRow> rows) {
    std::string out = "window_start,label\n";
    for (const GroundTruthRow& row : rows) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.15g,%d\n", row.window_start,
                      static_cast<int>(row.label));
        out += buf;
    }
    return out;
}

} // namespace floodwatch
