#pragma once

// Classic pcap reader/writer and Ethernet/IPv4 frame codec.
//
// Supported container: classic pcap only, magic 0xA1B2C3D4 in either byte
// order, microsecond timestamps, link type 1 (Ethernet). pcapng and the
// nanosecond magic are rejected. Written files are little-endian, version
// 2.4, snaplen 65535. Checksums are not validated on read and are written
// as zero; feature extraction never looks at them.
//
// Frames that fail Ethernet/IPv4 decode (ARP, IPv6, VLAN tags, IP
// fragments, runts) are counted in CaptureMeta and skipped, never fatal.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "floodwatch/errors.hpp"
#include "floodwatch/packet.hpp"

namespace floodwatch {

inline constexpr std::uint32_t kPcapMagic = 0xa1b2c3d4u;
inline constexpr std::uint32_t kPcapMagicSwapped = 0xd4c3b2a1u;
inline constexpr std::uint32_t kPcapMagicNanos = 0xa1b23c4du;
inline constexpr std::uint32_t kPcapMagicNanosSwapped = 0x4d3cb2a1u;
inline constexpr std::uint32_t kPcapngMagic = 0x0a0d0d0au;
inline constexpr std::uint32_t kLinkTypeEthernet = 1;
inline constexpr std::uint16_t kEthertypeIpv4 = 0x0800;
inline constexpr std::size_t kEthernetHeaderSize = 14;
inline constexpr std::size_t kMinIpv4FrameSize = 34; // Ethernet + minimal IPv4

enum class Endianness : std::uint8_t { Little, Big };

struct CaptureMeta {
    Endianness endianness = Endianness::Little;
    std::uint32_t snaplen = 0;
    std::uint32_t link_type = 0;
    std::uint64_t packet_count = 0;   // records decoded
    std::uint64_t skipped_frames = 0; // frames that failed decode
};

namespace detail {

inline std::uint16_t load_be16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

inline std::uint32_t load_be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline std::uint32_t load32(const std::uint8_t* p, bool swapped) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    if (swapped) v = __builtin_bswap32(v);
    return v;
}

inline std::uint16_t load16(const std::uint8_t* p, bool swapped) {
    std::uint16_t v;
    std::memcpy(&v, p, 2);
    if (swapped) v = __builtin_bswap16(v);
    return v;
}

inline void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(v & 0xff);
    out.push_back((v >> 8) & 0xff);
    out.push_back((v >> 16) & 0xff);
    out.push_back((v >> 24) & 0xff);
}

inline void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(v & 0xff);
    out.push_back((v >> 8) & 0xff);
}

inline void put_be16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back((v >> 8) & 0xff);
    out.push_back(v & 0xff);
}

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back((v >> 24) & 0xff);
    out.push_back((v >> 16) & 0xff);
    out.push_back((v >> 8) & 0xff);
    out.push_back(v & 0xff);
}

} // namespace detail

// Decodes one Ethernet frame into a PacketRecord (timestamp left at 0).
// Throws DecodeError subtypes; never reads past `raw`.
inline PacketRecord decode_frame(std::span<const std::uint8_t> raw, std::uint32_t link_type) {
    if (link_type != kLinkTypeEthernet)
        throw UnsupportedLinkType("link type " + std::to_string(link_type) + " (expected 1)");
    if (raw.size() < kEthernetHeaderSize) throw TruncatedFrame("frame shorter than Ethernet header");

    const std::uint16_t ethertype = detail::load_be16(raw.data() + 12);
    if (ethertype != kEthertypeIpv4)
        throw NonIPv4Frame("ethertype " + std::to_string(ethertype));

    if (raw.size() < kEthernetHeaderSize + 20) throw TruncatedFrame("IPv4 header truncated");
    const std::uint8_t* ip = raw.data() + kEthernetHeaderSize;
    const std::uint8_t version = ip[0] >> 4;
    if (version != 4) throw NonIPv4Frame("IP version " + std::to_string(version));
    const std::size_t ihl = std::size_t(ip[0] & 0x0f) * 4;
    if (ihl < 20) throw BadIHL("IHL " + std::to_string(ihl / 4));
    if (raw.size() < kEthernetHeaderSize + ihl) throw TruncatedFrame("IPv4 options truncated");

    const std::uint16_t frag = detail::load_be16(ip + 6);
    const bool more_fragments = (frag & 0x2000) != 0;
    const std::uint16_t frag_offset = frag & 0x1fff;
    if (frag_offset != 0 || more_fragments) throw FragmentedFrame("IP fragment");

    PacketRecord rec;
    rec.ip_protocol = ip[9];
    rec.protocol = protocol_kind_of(rec.ip_protocol);
    rec.src_ip = Ipv4(detail::load_be32(ip + 12));
    rec.dst_ip = Ipv4(detail::load_be32(ip + 16));
    rec.length = static_cast<std::uint32_t>(raw.size());

    const std::uint8_t* l4 = ip + ihl;
    const std::size_t l4_avail = raw.size() - kEthernetHeaderSize - ihl;
    switch (rec.protocol) {
        case ProtocolKind::Tcp:
            if (l4_avail < 20) throw TruncatedFrame("TCP header truncated");
            rec.src_port = detail::load_be16(l4);
            rec.dst_port = detail::load_be16(l4 + 2);
            rec.tcp_flags = l4[13] & tcpflag::kMask;
            break;
        case ProtocolKind::Udp:
            if (l4_avail < 8) throw TruncatedFrame("UDP header truncated");
            rec.src_port = detail::load_be16(l4);
            rec.dst_port = detail::load_be16(l4 + 2);
            break;
        case ProtocolKind::Icmp:
            if (l4_avail < 8) throw TruncatedFrame("ICMP header truncated");
            rec.icmp_type = l4[0];
            break;
        case ProtocolKind::Other:
            break;
    }
    return rec;
}

// Re-encodes a record as Ethernet+IPv4+(TCP|UDP|ICMP). MAC addresses are
// synthesized from the IPv4 bytes (locally administered), checksums are
// zero, and the payload is zero padding up to rec.length.
inline std::vector<std::uint8_t> encode_frame(const PacketRecord& rec) {
    std::size_t l4_size = 0;
    switch (rec.protocol) {
        case ProtocolKind::Tcp: l4_size = 20; break;
        case ProtocolKind::Udp: l4_size = 8; break;
        case ProtocolKind::Icmp: l4_size = 8; break;
        case ProtocolKind::Other:
            throw UnencodableRecord("no encoding rule for protocol code " +
                                    std::to_string(rec.ip_protocol));
    }
    const std::size_t min_len = kEthernetHeaderSize + 20 + l4_size;
    if (rec.length < min_len)
        throw UnencodableRecord("length " + std::to_string(rec.length) +
                                " below header size " + std::to_string(min_len));
    if (rec.length > 65535 + kEthernetHeaderSize)
        throw UnencodableRecord("length " + std::to_string(rec.length) + " exceeds IPv4 maximum");

    std::vector<std::uint8_t> out;
    out.reserve(rec.length);

    auto push_mac = [&out](Ipv4 ip) {
        out.push_back(0x02);
        out.push_back(0x00);
        out.push_back((ip.value >> 24) & 0xff);
        out.push_back((ip.value >> 16) & 0xff);
        out.push_back((ip.value >> 8) & 0xff);
        out.push_back(ip.value & 0xff);
    };
    push_mac(rec.dst_ip);
    push_mac(rec.src_ip);
    detail::put_be16(out, kEthertypeIpv4);

    const auto ip_total = static_cast<std::uint16_t>(rec.length - kEthernetHeaderSize);
    out.push_back(0x45); // version 4, IHL 5
    out.push_back(0x00);
    detail::put_be16(out, ip_total);
    detail::put_be16(out, 0); // identification
    detail::put_be16(out, 0); // flags + fragment offset
    out.push_back(64);        // TTL
    out.push_back(rec.ip_protocol);
    detail::put_be16(out, 0); // checksum
    detail::put_be32(out, rec.src_ip.value);
    detail::put_be32(out, rec.dst_ip.value);

    switch (rec.protocol) {
        case ProtocolKind::Tcp:
            detail::put_be16(out, rec.src_port);
            detail::put_be16(out, rec.dst_port);
            detail::put_be32(out, 0); // seq
            detail::put_be32(out, 0); // ack
            out.push_back(0x50);      // data offset 5
            out.push_back(rec.tcp_flags & tcpflag::kMask);
            detail::put_be16(out, 8192); // window
            detail::put_be16(out, 0);    // checksum
            detail::put_be16(out, 0);    // urgent pointer
            break;
        case ProtocolKind::Udp: {
            detail::put_be16(out, rec.src_port);
            detail::put_be16(out, rec.dst_port);
            const auto udp_len = static_cast<std::uint16_t>(rec.length - kEthernetHeaderSize - 20);
            detail::put_be16(out, udp_len);
            detail::put_be16(out, 0); // checksum
            break;
        }
        case ProtocolKind::Icmp:
            out.push_back(rec.icmp_type.value_or(8));
            out.push_back(0);         // code
            detail::put_be16(out, 0); // checksum
            detail::put_be32(out, 0); // identifier + sequence
            break;
        case ProtocolKind::Other:
            break;
    }

    out.resize(rec.length, 0);
    return out;
}

// Reads a classic pcap byte stream. Records come back in file order with
// timestamps reconstructed as sec + usec * 1e-6.
inline std::pair<CaptureMeta, std::vector<PacketRecord>> read_pcap(
    std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw TruncatedHeader("missing pcap global header");
    std::uint32_t magic;
    std::memcpy(&magic, bytes.data(), 4);

    bool swapped = false;
    if (magic == kPcapMagic) {
        swapped = false;
    } else if (magic == kPcapMagicSwapped) {
        swapped = true;
    } else if (magic == kPcapMagicNanos || magic == kPcapMagicNanosSwapped) {
        throw UnsupportedFormat("nanosecond pcap is not supported");
    } else if (magic == kPcapngMagic || __builtin_bswap32(magic) == kPcapngMagic) {
        throw UnsupportedFormat("pcapng is not supported");
    } else {
        throw BadMagic("not a pcap file");
    }
    if (bytes.size() < 24) throw TruncatedHeader("pcap global header truncated");

    CaptureMeta meta;
    // Host-endian file read on a little-endian build means `swapped` tracks
    // the file's byte order directly.
    meta.endianness = swapped ? Endianness::Big : Endianness::Little;
    meta.snaplen = detail::load32(bytes.data() + 16, swapped);
    meta.link_type = detail::load32(bytes.data() + 20, swapped);
    if (meta.link_type != kLinkTypeEthernet)
        throw UnsupportedLinkType("link type " + std::to_string(meta.link_type));

    std::vector<PacketRecord> records;
    std::size_t pos = 24;
    while (pos < bytes.size()) {
        if (bytes.size() - pos < 16) throw TruncatedHeader("record header truncated");
        const std::uint32_t ts_sec = detail::load32(bytes.data() + pos, swapped);
        const std::uint32_t ts_usec = detail::load32(bytes.data() + pos + 4, swapped);
        const std::uint32_t incl_len = detail::load32(bytes.data() + pos + 8, swapped);
        const std::uint32_t orig_len = detail::load32(bytes.data() + pos + 12, swapped);
        pos += 16;
        if (bytes.size() - pos < incl_len) throw TruncatedHeader("record body truncated");

        try {
            PacketRecord rec = decode_frame(bytes.subspan(pos, incl_len), meta.link_type);
            rec.timestamp = static_cast<double>(ts_sec) + static_cast<double>(ts_usec) * 1e-6;
            rec.length = orig_len;
            records.push_back(rec);
            ++meta.packet_count;
        } catch (const DecodeError&) {
            ++meta.skipped_frames;
        }
        pos += incl_len;
    }
    return {meta, std::move(records)};
}

// Writes a little-endian classic pcap stream. Records must be non-empty
// with non-decreasing timestamps; each must be encodable per encode_frame.
inline std::vector<std::uint8_t> write_pcap(std::span<const PacketRecord> records) {
    if (records.empty()) throw UnencodableRecord("no records to write");
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].timestamp < records[i - 1].timestamp)
            throw UnencodableRecord("timestamps must be non-decreasing");

    std::vector<std::uint8_t> out;
    detail::put_le32(out, kPcapMagic);
    detail::put_le16(out, 2); // version major
    detail::put_le16(out, 4); // version minor
    detail::put_le32(out, 0); // thiszone
    detail::put_le32(out, 0); // sigfigs
    detail::put_le32(out, 65535);
    detail::put_le32(out, kLinkTypeEthernet);

    for (const PacketRecord& rec : records) {
        if (!(rec.timestamp >= 0.0) || !std::isfinite(rec.timestamp))
            throw UnencodableRecord("timestamp must be finite and non-negative");
        const std::vector<std::uint8_t> frame = encode_frame(rec);
        const double whole = std::floor(rec.timestamp);
        auto sec = static_cast<std::uint64_t>(whole);
        auto usec = static_cast<std::uint64_t>(std::llround((rec.timestamp - whole) * 1e6));
        if (usec >= 1000000) {
            sec += usec / 1000000;
            usec %= 1000000;
        }
        detail::put_le32(out, static_cast<std::uint32_t>(sec));
        detail::put_le32(out, static_cast<std::uint32_t>(usec));
        detail::put_le32(out, static_cast<std::uint32_t>(frame.size()));
        detail::put_le32(out, static_cast<std::uint32_t>(frame.size()));
        out.insert(out.end(), frame.begin(), frame.end());
    }
    return out;
}

// Keeps exactly the records whose source or destination is `device_ip`,
// in their original order.
inline std::vector<PacketRecord> filter_by_device(std::span<const PacketRecord> records,
                                                  Ipv4 device_ip) {
    std::vector<PacketRecord> out;
    for (const PacketRecord& rec : records)
        if (rec.involves(device_ip)) out.push_back(rec);
    return out;
}

} // namespace floodwatch
