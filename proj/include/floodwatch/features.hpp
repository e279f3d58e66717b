#pragma once

// Windowed feature extraction: slice a packet stream into fixed sampling
// windows per device and summarize each window as a 21-dimension vector.
//
// Feature layout (index order is part of the CSV and model contracts):
//
//   0  syn_count          TCP packets with SYN set
//   1  ack_count          TCP packets with ACK set
//   2  psh_count          TCP packets with PSH set
//   3  urg_count          TCP packets with URG set
//   4  fin_count          TCP packets with FIN set
//   5  rst_count          TCP packets with RST set
//   6  tcp_frac           fraction of packets that are TCP
//   7  udp_frac           fraction of packets that are UDP
//   8  icmp_frac          fraction of packets that are ICMP
//   9  pkt_count          packets in the window
//   10 byte_count         sum of frame lengths
//   11 len_mean           mean frame length
//   12 len_var            population variance of frame length
//   13 len_min            minimum frame length
//   14 len_max            maximum frame length
//   15 iat_mean           mean inter-arrival gap (0 for a single packet)
//   16 iat_var            population variance of inter-arrival gaps
//   17 duration_mean      per-packet span of its 5-tuple flow within the window
//   18 dst_port_entropy   Shannon entropy (nats) of destination ports;
//                         portless protocols share one pseudo-port bucket
//   19 unique_peer_count  distinct non-device endpoints seen
//   20 inbound_frac       fraction of packets addressed to the device
//
// Windows are non-overlapping, tiled from the capture's first packet
// timestamp in steps of `samp`; windows without device packets are never
// materialized. Variances are population variances (n = 1 gives 0).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "floodwatch/errors.hpp"
#include "floodwatch/io.hpp"
#include "floodwatch/matrix.hpp"
#include "floodwatch/packet.hpp"
#include "floodwatch/pcap.hpp"

namespace floodwatch {

inline constexpr std::size_t kFeatureCount = 21;

using FeatureVector = std::array<double, kFeatureCount>;

namespace feat {
enum Index : std::size_t {
    kSynCount = 0,
    kAckCount = 1,
    kPshCount = 2,
    kUrgCount = 3,
    kFinCount = 4,
    kRstCount = 5,
    kTcpFrac = 6,
    kUdpFrac = 7,
    kIcmpFrac = 8,
    kPktCount = 9,
    kByteCount = 10,
    kLenMean = 11,
    kLenVar = 12,
    kLenMin = 13,
    kLenMax = 14,
    kIatMean = 15,
    kIatVar = 16,
    kDurationMean = 17,
    kDstPortEntropy = 18,
    kUniquePeerCount = 19,
    kInboundFrac = 20,
};
} // namespace feat

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "syn_count",     "ack_count",        "psh_count",         "urg_count",   "fin_count",
    "rst_count",     "tcp_frac",         "udp_frac",          "icmp_frac",   "pkt_count",
    "byte_count",    "len_mean",         "len_var",           "len_min",     "len_max",
    "iat_mean",      "iat_var",          "duration_mean",     "dst_port_entropy",
    "unique_peer_count", "inbound_frac"};

enum class ClassLabel : int { Normal = 0, SynFlood = 1, IcmpFlood = 2 };

inline std::string_view class_name(ClassLabel label) {
    switch (label) {
        case ClassLabel::Normal: return "normal";
        case ClassLabel::SynFlood: return "syn_flood";
        case ClassLabel::IcmpFlood: return "icmp_flood";
    }
    return "?";
}

inline ClassLabel class_from_code(long code) {
    if (code < 0 || code > 2) throw SchemaMismatch("unknown class code " + std::to_string(code));
    return static_cast<ClassLabel>(code);
}

struct FlowWindow {
    Ipv4 device_ip;
    double start_time = 0.0;
    double end_time = 0.0;
    std::vector<PacketRecord> packets; // device traffic only, time order
};

struct LabeledDataset {
    Matrix X; // n x 21, columns in kFeatureNames order
    std::vector<ClassLabel> y;

    std::size_t size() const { return y.size(); }
    bool empty() const { return y.empty(); }

    void push(const FeatureVector& fv, ClassLabel label) {
        X.push_row(std::span<const double>(fv.data(), fv.size()));
        y.push_back(label);
    }
};

// Tiles [first packet, last packet] into windows of `samp` seconds and
// buckets the device's packets. Records are sorted by time if needed.
inline std::vector<FlowWindow> windowize(std::span<const PacketRecord> records, Ipv4 device_ip,
                                         double samp) {
    if (!(samp > 0.0)) throw InvalidArgument("samp must be positive");

    std::vector<PacketRecord> sorted;
    const bool needs_sort = !std::is_sorted(
        records.begin(), records.end(),
        [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp < b.timestamp; });
    std::span<const PacketRecord> view = records;
    if (needs_sort) {
        sorted.assign(records.begin(), records.end());
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const PacketRecord& a, const PacketRecord& b) {
                             return a.timestamp < b.timestamp;
                         });
        view = sorted;
    }

    std::vector<FlowWindow> windows;
    if (view.empty()) throw NoDeviceTraffic("empty capture");
    const double origin = view.front().timestamp;

    std::size_t current_index = 0;
    bool have_current = false;
    for (const PacketRecord& rec : view) {
        if (!rec.involves(device_ip)) continue;
        const auto index =
            static_cast<std::size_t>(std::floor((rec.timestamp - origin) / samp));
        if (!have_current || index != current_index) {
            FlowWindow w;
            w.device_ip = device_ip;
            w.start_time = origin + static_cast<double>(index) * samp;
            w.end_time = w.start_time + samp;
            windows.push_back(std::move(w));
            current_index = index;
            have_current = true;
        }
        windows.back().packets.push_back(rec);
    }
    if (windows.empty()) throw NoDeviceTraffic("no packet involves " + device_ip.to_string());
    return windows;
}

inline FeatureVector extract_features(const FlowWindow& window) {
    if (window.packets.empty()) throw InvalidArgument("window has no packets");
    const auto& pkts = window.packets;
    const double n = static_cast<double>(pkts.size());

    FeatureVector f{};
    double tcp = 0, udp = 0, icmp = 0, inbound = 0;
    double byte_sum = 0, len_min = pkts.front().length, len_max = 0;
    std::set<std::uint32_t> peers;

    for (const PacketRecord& p : pkts) {
        if (p.protocol == ProtocolKind::Tcp) {
            ++tcp;
            if (p.has_flag(tcpflag::kSyn)) f[feat::kSynCount] += 1;
            if (p.has_flag(tcpflag::kAck)) f[feat::kAckCount] += 1;
            if (p.has_flag(tcpflag::kPsh)) f[feat::kPshCount] += 1;
            if (p.has_flag(tcpflag::kUrg)) f[feat::kUrgCount] += 1;
            if (p.has_flag(tcpflag::kFin)) f[feat::kFinCount] += 1;
            if (p.has_flag(tcpflag::kRst)) f[feat::kRstCount] += 1;
        } else if (p.protocol == ProtocolKind::Udp) {
            ++udp;
        } else if (p.protocol == ProtocolKind::Icmp) {
            ++icmp;
        }
        if (p.dst_ip == window.device_ip) ++inbound;
        byte_sum += p.length;
        len_min = std::min(len_min, static_cast<double>(p.length));
        len_max = std::max(len_max, static_cast<double>(p.length));
        const Ipv4 peer = (p.src_ip == window.device_ip) ? p.dst_ip : p.src_ip;
        peers.insert(peer.value);
    }

    f[feat::kTcpFrac] = tcp / n;
    f[feat::kUdpFrac] = udp / n;
    f[feat::kIcmpFrac] = icmp / n;
    f[feat::kPktCount] = n;
    f[feat::kByteCount] = byte_sum;
    f[feat::kLenMin] = len_min;
    f[feat::kLenMax] = len_max;

    const double len_mean = byte_sum / n;
    double len_var = 0;
    for (const PacketRecord& p : pkts) {
        const double d = static_cast<double>(p.length) - len_mean;
        len_var += d * d;
    }
    f[feat::kLenMean] = len_mean;
    f[feat::kLenVar] = len_var / n;

    if (pkts.size() > 1) {
        const double gaps = n - 1.0;
        double iat_sum = 0;
        for (std::size_t i = 1; i < pkts.size(); ++i)
            iat_sum += pkts[i].timestamp - pkts[i - 1].timestamp;
        const double iat_mean = iat_sum / gaps;
        double iat_var = 0;
        for (std::size_t i = 1; i < pkts.size(); ++i) {
            const double d = (pkts[i].timestamp - pkts[i - 1].timestamp) - iat_mean;
            iat_var += d * d;
        }
        f[feat::kIatMean] = iat_mean;
        f[feat::kIatVar] = iat_var / gaps;
    }

    // Flow span per packet: packets of the same 5-tuple share their flow's
    // first-to-last spread inside the window.
    struct FlowSpan {
        double first, last;
        double count;
    };
    std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint16_t, std::uint16_t, std::uint8_t>,
             FlowSpan>
        flows;
    for (const PacketRecord& p : pkts) {
        const auto key = std::make_tuple(p.src_ip.value, p.dst_ip.value, p.src_port, p.dst_port,
                                         p.ip_protocol);
        auto [it, inserted] = flows.try_emplace(key, FlowSpan{p.timestamp, p.timestamp, 0.0});
        it->second.last = p.timestamp;
        it->second.count += 1.0;
    }
    double span_weighted = 0;
    for (const auto& [key, flow] : flows) span_weighted += flow.count * (flow.last - flow.first);
    f[feat::kDurationMean] = span_weighted / n;

    std::map<std::int32_t, double> port_counts;
    for (const PacketRecord& p : pkts) {
        const bool has_ports =
            p.protocol == ProtocolKind::Tcp || p.protocol == ProtocolKind::Udp;
        port_counts[has_ports ? static_cast<std::int32_t>(p.dst_port) : -1] += 1.0;
    }
    double entropy = 0;
    for (const auto& [port, count] : port_counts) {
        const double prob = count / n;
        entropy -= prob * std::log(prob);
    }
    f[feat::kDstPortEntropy] = std::max(entropy, 0.0);

    f[feat::kUniquePeerCount] = static_cast<double>(peers.size());
    f[feat::kInboundFrac] = inbound / n;
    return f;
}

namespace detail {

// Shared labeling rule: any attacker SYN packet marks a SYN flood, any
// attacker ICMP packet an ICMP flood; when both appear the majority wins
// and ties go to SYN.
struct AttackTally {
    std::uint64_t syn = 0;
    std::uint64_t icmp = 0;

    void add(const PacketRecord& p) {
        if (p.protocol == ProtocolKind::Tcp && p.has_flag(tcpflag::kSyn)) ++syn;
        if (p.protocol == ProtocolKind::Icmp) ++icmp;
    }

    ClassLabel label() const {
        if (syn == 0 && icmp == 0) return ClassLabel::Normal;
        if (icmp > syn) return ClassLabel::IcmpFlood;
        return ClassLabel::SynFlood;
    }
};

} // namespace detail

// Labels a window by attacker-packet presence. The optional protocol filter
// restricts which attacker packets count (TCP => SYN flood evidence only,
// ICMP => ICMP flood evidence only).
inline ClassLabel label_window(const FlowWindow& window, Ipv4 attack_ip,
                               std::optional<ProtocolKind> attack_protocol = std::nullopt) {
    detail::AttackTally tally;
    for (const PacketRecord& p : window.packets) {
        if (p.src_ip != attack_ip) continue;
        if (attack_protocol && p.protocol != *attack_protocol) continue;
        tally.add(p);
    }
    return tally.label();
}

struct ScenarioInput {
    std::string pcap_path;
    Ipv4 device_ip;
    std::optional<Ipv4> attack_ip;
    double samp = 1.0;
};

// Windows every scenario capture and concatenates the labeled feature rows
// in scenario order, then window order.
inline LabeledDataset build_dataset(std::span<const ScenarioInput> scenarios) {
    LabeledDataset out;
    out.X = Matrix(0, kFeatureCount);
    for (const ScenarioInput& sc : scenarios) {
        const std::vector<std::uint8_t> bytes = read_file(sc.pcap_path);
        auto [meta, records] = read_pcap(bytes);
        const std::vector<FlowWindow> windows = windowize(records, sc.device_ip, sc.samp);
        for (const FlowWindow& w : windows) {
            const ClassLabel label =
                sc.attack_ip ? label_window(w, *sc.attack_ip) : ClassLabel::Normal;
            out.push(extract_features(w), label);
        }
    }
    return out;
}

// Per-bin byte totals for the device's traffic; empty bins emit 0 so the
// series is contiguous from the first to the last capture timestamp.
inline std::vector<std::pair<double, double>> throughput_series(
    std::span<const PacketRecord> records, Ipv4 device_ip, double bin) {
    if (!(bin > 0.0)) throw InvalidArgument("bin must be positive");
    if (records.empty()) return {};

    double t_min = records.front().timestamp, t_max = records.front().timestamp;
    for (const PacketRecord& r : records) {
        t_min = std::min(t_min, r.timestamp);
        t_max = std::max(t_max, r.timestamp);
    }
    const auto n_bins = static_cast<std::size_t>(std::floor((t_max - t_min) / bin)) + 1;

    std::vector<std::pair<double, double>> series(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i)
        series[i] = {t_min + static_cast<double>(i) * bin, 0.0};
    for (const PacketRecord& r : records) {
        if (!r.involves(device_ip)) continue;
        auto idx = static_cast<std::size_t>(std::floor((r.timestamp - t_min) / bin));
        idx = std::min(idx, n_bins - 1);
        series[idx].second += static_cast<double>(r.length);
    }
    return series;
}

} // namespace floodwatch
