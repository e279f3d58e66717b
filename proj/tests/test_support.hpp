#pragma once

// Shared fixtures: the reference scenario (loaded from the shipped config
// so tests and CLI runs exercise the same bytes) and small data builders.

#include <algorithm>
#include <string>
#include <vector>

#include "floodwatch.hpp"

namespace fwtest {

inline floodwatch::ScenarioSpec reference_spec() {
    const std::string path =
        std::string(FLOODWATCH_SOURCE_DIR) + "/configs/reference_scenario.conf";
    const floodwatch::Config cfg = floodwatch::Config::parse(floodwatch::read_text_file(path));
    return floodwatch::scenario_from_config(cfg);
}

// Generated once per process; generation is deterministic, so sharing is safe.
inline const floodwatch::GeneratedScenario& reference_scenario() {
    static const floodwatch::GeneratedScenario scenario =
        floodwatch::compose_scenario(reference_spec());
    return scenario;
}

inline floodwatch::LabeledDataset reference_dataset() {
    const auto& scenario = reference_scenario();
    const floodwatch::ScenarioSpec spec = reference_spec();
    floodwatch::LabeledDataset out;
    out.X = floodwatch::Matrix(0, floodwatch::kFeatureCount);
    const auto windows =
        floodwatch::windowize(scenario.records, spec.benign.device_ip, spec.samp);
    for (const auto& w : windows)
        out.push(floodwatch::extract_features(w),
                 floodwatch::label_window(w, spec.floods.at(0).attacker_ip));
    return out;
}

// n rows of d-dimensional N(mean, stddev^2 I).
inline floodwatch::Matrix gaussian_blob(std::size_t n, std::size_t d, double mean, double stddev,
                                        std::uint64_t seed) {
    floodwatch::Xoshiro256 rng(seed);
    floodwatch::Matrix x(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) x(r, c) = rng.normal(mean, stddev);
    return x;
}

inline floodwatch::PacketRecord make_tcp(double t, floodwatch::Ipv4 src, floodwatch::Ipv4 dst,
                                         std::uint16_t sport, std::uint16_t dport,
                                         std::uint8_t flags, std::uint32_t length) {
    floodwatch::PacketRecord rec;
    rec.timestamp = floodwatch::canonical_timestamp(t);
    rec.src_ip = src;
    rec.dst_ip = dst;
    rec.protocol = floodwatch::ProtocolKind::Tcp;
    rec.ip_protocol = 6;
    rec.src_port = sport;
    rec.dst_port = dport;
    rec.tcp_flags = flags;
    rec.length = length;
    return rec;
}

inline floodwatch::PacketRecord make_icmp(double t, floodwatch::Ipv4 src, floodwatch::Ipv4 dst,
                                          std::uint8_t type, std::uint32_t length) {
    floodwatch::PacketRecord rec;
    rec.timestamp = floodwatch::canonical_timestamp(t);
    rec.src_ip = src;
    rec.dst_ip = dst;
    rec.protocol = floodwatch::ProtocolKind::Icmp;
    rec.ip_protocol = 1;
    rec.icmp_type = type;
    rec.length = length;
    return rec;
}

} // namespace fwtest
