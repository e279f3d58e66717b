#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <vector>

#include "floodwatch.hpp"
#include "test_support.hpp"

using namespace floodwatch;
using Catch::Approx;

namespace {
const Ipv4 kDev(10, 0, 0, 5);
const Ipv4 kSrv(198, 51, 100, 10);
const Ipv4 kAtk(10, 0, 0, 66);
} // namespace

TEST_CASE("benign generator") {
    BenignProfile profile;
    profile.device_ip = kDev;
    profile.server_ip = kSrv;
    profile.rate = 50.0;

    const auto records = gen_benign(profile, 10.0, 7);

    SECTION("packet count concentrates at rate * duration") {
        // Poisson(500) plus two keep-alive packets every 5 s.
        const double expected = 50.0 * 10.0 + 2.0 * 2.0;
        const double sigma = std::sqrt(50.0 * 10.0);
        CHECK(std::abs(static_cast<double>(records.size()) - expected) <= 5.0 * sigma);
    }

    SECTION("every packet involves the device") {
        for (const auto& p : records) CHECK(p.involves(kDev));
    }

    SECTION("timestamps are sorted and the capture starts at t = 0") {
        CHECK(records.front().timestamp == 0.0);
        for (std::size_t i = 1; i < records.size(); ++i)
            CHECK(records[i].timestamp >= records[i - 1].timestamp);
    }

    SECTION("same seed reproduces the stream, different seed does not") {
        CHECK(gen_benign(profile, 10.0, 7) == records);
        CHECK(gen_benign(profile, 10.0, 8) != records);
    }

    SECTION("lengths respect the configured bounds") {
        for (const auto& p : records) {
            CHECK(p.length >= profile.len_min);
            CHECK(p.length <= profile.len_max);
        }
    }

    SECTION("duty cycle keeps the average rate") {
        BenignProfile bursty = profile;
        bursty.duty_cycle = 0.5;
        const auto rec = gen_benign(bursty, 40.0, 7);
        const double expected = 50.0 * 40.0 + 2.0 * 8.0;
        const double sigma = std::sqrt(50.0 * 40.0);
        CHECK(std::abs(static_cast<double>(rec.size()) - expected) <= 5.0 * sigma);
        // Second half of each 10 s cycle only carries keep-alives.
        std::size_t off_cycle = 0;
        for (const auto& p : rec) {
            const double phase = std::fmod(p.timestamp, 10.0);
            if (phase >= 5.01 && p.tcp_flags != tcpflag::kAck) ++off_cycle;
        }
        CHECK(off_cycle == 0);
    }
}

TEST_CASE("SYN flood construction") {
    FloodProfile flood;
    flood.attacker_ip = kAtk;
    flood.target_ip = kDev;
    flood.kind = FloodKind::Syn;
    flood.rate = 2000.0;
    flood.start = 3.0;
    flood.duration = 5.0;

    const auto packets = gen_flood(flood, 17);

    SECTION("rate fidelity within one percent") {
        CHECK(std::abs(static_cast<double>(packets.size()) - 10000.0) <= 100.0);
    }

    SECTION("every packet is SYN and only SYN") {
        for (const auto& p : packets) {
            CHECK(p.protocol == ProtocolKind::Tcp);
            CHECK(p.tcp_flags == tcpflag::kSyn);
            CHECK(p.src_ip == kAtk);
            CHECK(p.dst_ip == kDev);
            CHECK(p.dst_port == 80);
            CHECK(p.length == 54);
            CHECK(p.timestamp >= 3.0);
            CHECK(p.timestamp < 8.0);
        }
    }

    SECTION("source ports are randomized by default") {
        std::set<std::uint16_t> ports;
        for (const auto& p : packets) ports.insert(p.src_port);
        CHECK(ports.size() > 1000);
        for (std::uint16_t port : ports) CHECK(port >= 1024);
    }

    SECTION("fixed source port when randomization is off") {
        FloodProfile fixed = flood;
        fixed.randomize_src_port = false;
        for (const auto& p : gen_flood(fixed, 17)) CHECK(p.src_port == 4321);
    }
}

TEST_CASE("ICMP flood construction") {
    FloodProfile flood;
    flood.attacker_ip = kAtk;
    flood.target_ip = kDev;
    flood.kind = FloodKind::Icmp;
    flood.rate = 1000.0;
    flood.start = 0.0;
    flood.duration = 2.0;

    const auto packets = gen_flood(flood, 23);
    CHECK(std::abs(static_cast<double>(packets.size()) - 2000.0) <= 20.0);
    for (const auto& p : packets) {
        CHECK(p.protocol == ProtocolKind::Icmp);
        REQUIRE(p.icmp_type.has_value());
        CHECK(*p.icmp_type == 8);
        CHECK(p.length == 98);
        CHECK(p.src_ip == kAtk);
        CHECK(p.dst_ip == kDev);
    }
}

TEST_CASE("composed scenarios") {
    ScenarioSpec spec;
    spec.duration = 30.0;
    spec.samp = 1.0;
    spec.seed = 5;
    spec.benign.device_ip = kDev;
    spec.benign.server_ip = kSrv;
    spec.benign.rate = 40.0;

    SECTION("no floods means an all-normal ground truth") {
        const auto scenario = compose_scenario(spec);
        CHECK(scenario.ground_truth.size() == 30);
        for (const auto& row : scenario.ground_truth) CHECK(row.label == ClassLabel::Normal);
    }

    SECTION("flood interval labels exactly its windows") {
        FloodProfile flood;
        flood.attacker_ip = kAtk;
        flood.target_ip = kDev;
        flood.kind = FloodKind::Icmp;
        flood.rate = 800.0;
        flood.start = 10.0;
        flood.duration = 10.0;
        spec.floods.push_back(flood);

        const auto scenario = compose_scenario(spec);
        REQUIRE(scenario.ground_truth.size() == 30);
        for (const auto& row : scenario.ground_truth) {
            const bool in_flood = row.window_start >= 10.0 && row.window_start < 20.0;
            CHECK(row.label ==
                  (in_flood ? ClassLabel::IcmpFlood : ClassLabel::Normal));
        }
    }

    SECTION("identical spec and seed give a byte-identical capture") {
        const auto a = compose_scenario(spec);
        const auto b = compose_scenario(spec);
        CHECK(a.pcap_bytes == b.pcap_bytes);
    }

    SECTION("merged stream is time-sorted") {
        FloodProfile flood;
        flood.attacker_ip = kAtk;
        flood.target_ip = kDev;
        flood.kind = FloodKind::Syn;
        flood.rate = 500.0;
        flood.start = 5.0;
        flood.duration = 3.0;
        spec.floods.push_back(flood);
        const auto scenario = compose_scenario(spec);
        for (std::size_t i = 1; i < scenario.records.size(); ++i)
            CHECK(scenario.records[i].timestamp >= scenario.records[i - 1].timestamp);
    }

    SECTION("flood outside the duration is rejected") {
        FloodProfile flood;
        flood.attacker_ip = kAtk;
        flood.target_ip = kDev;
        flood.rate = 100.0;
        flood.start = 25.0;
        flood.duration = 10.0;
        spec.floods.push_back(flood);
        CHECK_THROWS_AS(compose_scenario(spec), BadConfig);
    }
}

TEST_CASE("ground truth agrees with the feature module's labeling") {
    namespace fs = std::filesystem;
    const auto& scenario = fwtest::reference_scenario();
    const ScenarioSpec spec = fwtest::reference_spec();

    const fs::path dir = fs::temp_directory_path() / "floodwatch_gen_test";
    fs::create_directories(dir);
    const std::string pcap_path = (dir / "reference.pcap").string();
    write_file(pcap_path, scenario.pcap_bytes);

    const std::vector<ScenarioInput> scenarios = {
        {pcap_path, spec.benign.device_ip, spec.floods.at(0).attacker_ip, spec.samp}};
    const LabeledDataset dataset = build_dataset(scenarios);

    REQUIRE(dataset.size() == scenario.ground_truth.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        CHECK(dataset.y[i] == scenario.ground_truth[i].label);

    fs::remove_all(dir);
}

TEST_CASE("reference scenario shape") {
    const auto& scenario = fwtest::reference_scenario();
    REQUIRE(scenario.ground_truth.size() == 120);

    std::array<int, 3> counts{};
    for (const auto& row : scenario.ground_truth) ++counts[static_cast<std::size_t>(row.label)];
    CHECK(counts[0] == 90);
    CHECK(counts[1] == 15);
    CHECK(counts[2] == 15);

    // SYN windows sit exactly on [40, 55), ICMP on [80, 95).
    for (const auto& row : scenario.ground_truth) {
        if (row.window_start >= 40.0 && row.window_start < 55.0)
            CHECK(row.label == ClassLabel::SynFlood);
        else if (row.window_start >= 80.0 && row.window_start < 95.0)
            CHECK(row.label == ClassLabel::IcmpFlood);
        else
            CHECK(row.label == ClassLabel::Normal);
    }
}

TEST_CASE("ground truth CSV") {
    const std::vector<GroundTruthRow> rows = {{0.0, ClassLabel::Normal},
                                              {1.0, ClassLabel::SynFlood}};
    CHECK(ground_truth_to_csv(rows) == "window_start,label\n0,0\n1,1\n");
}
