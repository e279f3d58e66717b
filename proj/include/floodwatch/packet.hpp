#pragma once

#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>

#include "floodwatch/errors.hpp"

namespace floodwatch {

// IPv4 address held in host byte order.
struct Ipv4 {
    std::uint32_t value = 0;

    constexpr Ipv4() = default;
    constexpr explicit Ipv4(std::uint32_t v) : value(v) {}
    constexpr Ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
        : value((std::uint32_t(a) << 24) | (std::uint32_t(b) << 16) | (std::uint32_t(c) << 8) |
                std::uint32_t(d)) {}

    auto operator<=>(const Ipv4&) const = default;

    std::string to_string() const {
        return std::to_string((value >> 24) & 0xff) + '.' + std::to_string((value >> 16) & 0xff) +
               '.' + std::to_string((value >> 8) & 0xff) + '.' + std::to_string(value & 0xff);
    }

    static Ipv4 parse(const std::string& text) {
        std::uint32_t out = 0;
        std::size_t pos = 0;
        for (int octet = 0; octet < 4; ++octet) {
            if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
                throw InvalidArgument("not an IPv4 address: " + text);
            std::uint32_t v = 0;
            std::size_t digits = 0;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                v = v * 10 + std::uint32_t(text[pos] - '0');
                ++pos;
                if (++digits > 3 || v > 255)
                    throw InvalidArgument("not an IPv4 address: " + text);
            }
            out = (out << 8) | v;
            if (octet < 3) {
                if (pos >= text.size() || text[pos] != '.')
                    throw InvalidArgument("not an IPv4 address: " + text);
                ++pos;
            }
        }
        if (pos != text.size()) throw InvalidArgument("not an IPv4 address: " + text);
        return Ipv4(out);
    }
};

enum class ProtocolKind : std::uint8_t { Tcp, Udp, Icmp, Other };

inline ProtocolKind protocol_kind_of(std::uint8_t ip_protocol) {
    switch (ip_protocol) {
        case 6: return ProtocolKind::Tcp;
        case 17: return ProtocolKind::Udp;
        case 1: return ProtocolKind::Icmp;
        default: return ProtocolKind::Other;
    }
}

// On-wire TCP flag bits (low six of the flag byte).
namespace tcpflag {
inline constexpr std::uint8_t kFin = 0x01;
inline constexpr std::uint8_t kSyn = 0x02;
inline constexpr std::uint8_t kRst = 0x04;
inline constexpr std::uint8_t kPsh = 0x08;
inline constexpr std::uint8_t kAck = 0x10;
inline constexpr std::uint8_t kUrg = 0x20;
inline constexpr std::uint8_t kMask = 0x3f;
} // namespace tcpflag

// One decoded frame. tcp_flags is empty unless protocol is TCP; ports are 0
// when the protocol has none; length is the full frame size in bytes.
struct PacketRecord {
    double timestamp = 0.0; // seconds since epoch, microsecond resolution
    Ipv4 src_ip;
    Ipv4 dst_ip;
    ProtocolKind protocol = ProtocolKind::Other;
    std::uint8_t ip_protocol = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t tcp_flags = 0;
    std::uint32_t length = 0;
    std::optional<std::uint8_t> icmp_type;

    bool operator==(const PacketRecord&) const = default;

    bool has_flag(std::uint8_t flag) const { return (tcp_flags & flag) != 0; }
    bool involves(Ipv4 ip) const { return src_ip == ip || dst_ip == ip; }
};

// Snaps a timestamp to the microsecond grid the capture format stores, so
// that encode/decode round-trips reproduce the value exactly.
inline double canonical_timestamp(double seconds) {
    const double whole = std::floor(seconds);
    auto sec = static_cast<std::uint64_t>(whole);
    auto usec = static_cast<std::uint64_t>(std::llround((seconds - whole) * 1e6));
    if (usec >= 1000000) {
        sec += usec / 1000000;
        usec %= 1000000;
    }
    return static_cast<double>(sec) + static_cast<double>(usec) * 1e-6;
}

} // namespace floodwatch
