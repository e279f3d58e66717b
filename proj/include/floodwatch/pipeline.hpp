#pragma once

// End-to-end detection: window -> features -> ensemble verdict -> (if
// anomalous) attack classification -> (if a known attack) mitigation rule.
// Rules are emitted as artifacts in OpenFlow and packet-filter syntax; no
// switch is driven. A rule exists iff the window was anomalous AND the
// classifier named a non-normal attack.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "floodwatch/ensemble.hpp"
#include "floodwatch/errors.hpp"
#include "floodwatch/features.hpp"
#include "floodwatch/pcap.hpp"
#include "floodwatch/random_forest.hpp"

#include "json.hpp"

namespace floodwatch {

struct DetectionEvent {
    double window_start = 0.0;
    double window_end = 0.0;
    Ipv4 device_ip;
    Verdict verdict;
    std::optional<ClassLabel> attack_type; // present iff verdict.is_anomaly
    std::vector<Ipv4> suspect_ips;         // non-device sources, busiest first
    double response_time = 0.0;            // seconds, extraction to decision
};

struct MitigationRule {
    Ipv4 src_ip;
    std::optional<ProtocolKind> protocol;
    bool syn_only = false; // constrain the match to SYN-flagged TCP
    int priority = 100;
    ClassLabel reason = ClassLabel::Normal;
    double created_at = 0.0;

    bool operator==(const MitigationRule&) const = default;
};

struct PipelineConfig {
    Ipv4 device_ip;
    double samp = 1.0;
    double throughput_bin = 1.0;
    int rule_priority = 100;
};

inline DetectionEvent detect_window(const FlowWindow& window, const AnomalyEnsemble& ensemble,
                                    const RandomForestModel& classifier) {
    const auto t0 = std::chrono::steady_clock::now();

    DetectionEvent event;
    event.window_start = window.start_time;
    event.window_end = window.end_time;
    event.device_ip = window.device_ip;

    const FeatureVector fv = extract_features(window);
    event.verdict = ensemble_predict(ensemble, fv);
    if (event.verdict.is_anomaly) event.attack_type = rf_predict(classifier, fv);

    std::map<std::uint32_t, std::uint64_t> source_counts;
    for (const PacketRecord& p : window.packets)
        if (p.src_ip != window.device_ip) ++source_counts[p.src_ip.value];
    std::vector<std::pair<std::uint64_t, std::uint32_t>> ranked;
    ranked.reserve(source_counts.size());
    for (const auto& [ip, count] : source_counts) ranked.emplace_back(count, ip);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (const auto& [count, ip] : ranked) event.suspect_ips.push_back(Ipv4(ip));

    const auto t1 = std::chrono::steady_clock::now();
    event.response_time =
        std::max(std::chrono::duration<double>(t1 - t0).count(), 1e-9);
    return event;
}

// Emits a DROP rule for the top suspect when the event names an attack;
// nothing for benign or unclassified-anomaly events.
inline std::optional<MitigationRule> make_rule(const DetectionEvent& event,
                                               int priority = 100) {
    if (!event.attack_type || *event.attack_type == ClassLabel::Normal) return std::nullopt;
    if (event.suspect_ips.empty())
        throw NoSuspect("anomalous window has no non-device source to block");

    MitigationRule rule;
    rule.src_ip = event.suspect_ips.front();
    rule.priority = priority;
    rule.reason = *event.attack_type;
    rule.created_at = event.window_end;
    if (*event.attack_type == ClassLabel::SynFlood) {
        rule.protocol = ProtocolKind::Tcp;
        rule.syn_only = true;
    } else if (*event.attack_type == ClassLabel::IcmpFlood) {
        rule.protocol = ProtocolKind::Icmp;
    }
    return rule;
}

inline std::string render_rule_openflow(const MitigationRule& rule) {
    std::string out = "priority=" + std::to_string(rule.priority) + ",ip,nw_src=" +
                      rule.src_ip.to_string();
    if (rule.protocol == ProtocolKind::Tcp) {
        out += ",nw_proto=6";
        if (rule.syn_only) out += ",tcp_flags=+syn";
    } else if (rule.protocol == ProtocolKind::Icmp) {
        out += ",nw_proto=1";
    } else if (rule.protocol == ProtocolKind::Udp) {
        out += ",nw_proto=17";
    }
    out += ",actions=drop";
    return out;
}

inline std::string render_rule_packetfilter(const MitigationRule& rule) {
    std::string out = "-A FORWARD -s " + rule.src_ip.to_string();
    if (rule.protocol == ProtocolKind::Tcp) {
        out += " -p tcp";
        if (rule.syn_only) out += " --syn";
    } else if (rule.protocol == ProtocolKind::Icmp) {
        out += " -p icmp";
    } else if (rule.protocol == ProtocolKind::Udp) {
        out += " -p udp";
    }
    out += " -j DROP";
    return out;
}

struct DetectionSummary {
    std::size_t windows = 0;
    std::size_t anomalies = 0;
    std::array<std::size_t, kClassCount> events_by_class{}; // classified anomalies
    double mean_response_time = 0.0;
    double max_response_time = 0.0;
};

struct DetectionReport {
    Ipv4 device_ip;
    double samp = 1.0;
    std::vector<DetectionEvent> events;
    std::vector<MitigationRule> rules; // deduplicated by match
    std::vector<std::pair<double, double>> throughput;
    DetectionSummary summary;
};

inline DetectionReport run_offline(std::span<const PacketRecord> records,
                                   const PipelineConfig& config, const AnomalyEnsemble& ensemble,
                                   const RandomForestModel& classifier) {
    DetectionReport report;
    report.device_ip = config.device_ip;
    report.samp = config.samp;

    const std::vector<FlowWindow> windows = windowize(records, config.device_ip, config.samp);
    std::set<std::tuple<std::uint32_t, int, bool>> seen_rules;
    double total_response = 0.0;

    for (const FlowWindow& window : windows) {
        DetectionEvent event = detect_window(window, ensemble, classifier);
        ++report.summary.windows;
        total_response += event.response_time;
        report.summary.max_response_time =
            std::max(report.summary.max_response_time, event.response_time);
        if (event.verdict.is_anomaly) {
            ++report.summary.anomalies;
            ++report.summary.events_by_class[static_cast<std::size_t>(*event.attack_type)];
            if (!event.suspect_ips.empty()) {
                if (auto rule = make_rule(event, config.rule_priority)) {
                    const auto key = std::make_tuple(
                        rule->src_ip.value,
                        rule->protocol ? static_cast<int>(*rule->protocol) : -1, rule->syn_only);
                    if (seen_rules.insert(key).second) report.rules.push_back(*rule);
                }
            }
        }
        report.events.push_back(std::move(event));
    }
    if (report.summary.windows > 0)
        report.summary.mean_response_time =
            total_response / static_cast<double>(report.summary.windows);

    report.throughput = throughput_series(records, config.device_ip, config.throughput_bin);
    return report;
}

inline nlohmann::json report_to_json(const DetectionReport& report) {
    nlohmann::json doc;
    doc["format"] = "floodwatch-report";
    doc["version"] = 1;
    doc["device_ip"] = report.device_ip.to_string();
    doc["samp"] = report.samp;

    nlohmann::json events = nlohmann::json::array();
    for (const DetectionEvent& e : report.events) {
        nlohmann::json je;
        je["window_start"] = e.window_start;
        je["window_end"] = e.window_end;
        je["votes"] = {{"isolation_forest", e.verdict.p1},
                       {"ocsvm", e.verdict.p2},
                       {"elliptic_envelope", e.verdict.p3},
                       {"sum", e.verdict.p_sum}};
        je["is_anomaly"] = e.verdict.is_anomaly;
        if (e.attack_type)
            je["attack_type"] = std::string(class_name(*e.attack_type));
        else
            je["attack_type"] = nullptr;
        nlohmann::json suspects = nlohmann::json::array();
        for (Ipv4 ip : e.suspect_ips) suspects.push_back(ip.to_string());
        je["suspects"] = suspects;
        je["response_time"] = e.response_time;
        events.push_back(je);
    }
    doc["events"] = events;

    nlohmann::json rules = nlohmann::json::array();
    for (const MitigationRule& r : report.rules) {
        nlohmann::json jr;
        jr["src_ip"] = r.src_ip.to_string();
        if (r.protocol == ProtocolKind::Tcp)
            jr["protocol"] = "tcp";
        else if (r.protocol == ProtocolKind::Icmp)
            jr["protocol"] = "icmp";
        else if (r.protocol == ProtocolKind::Udp)
            jr["protocol"] = "udp";
        else
            jr["protocol"] = nullptr;
        jr["syn_only"] = r.syn_only;
        jr["action"] = "drop";
        jr["priority"] = r.priority;
        jr["reason"] = std::string(class_name(r.reason));
        jr["created_at"] = r.created_at;
        jr["openflow"] = render_rule_openflow(r);
        jr["packetfilter"] = render_rule_packetfilter(r);
        rules.push_back(jr);
    }
    doc["rules"] = rules;

    nlohmann::json series = nlohmann::json::array();
    for (const auto& [t, bytes] : report.throughput) series.push_back({t, bytes});
    doc["throughput"] = series;

    doc["summary"] = {{"windows", report.summary.windows},
                      {"anomalies", report.summary.anomalies},
                      {"events_by_class",
                       {{"normal", report.summary.events_by_class[0]},
                        {"syn_flood", report.summary.events_by_class[1]},
                        {"icmp_flood", report.summary.events_by_class[2]}}},
                      {"mean_response_time", report.summary.mean_response_time},
                      {"max_response_time", report.summary.max_response_time}};
    return doc;
}

} // namespace floodwatch
