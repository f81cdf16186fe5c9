#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bmlab/errors.hpp"
#include "bmlab/excursion.hpp"  // byte helpers
#include "bmlab/quadmap.hpp"

namespace bmlab {

// "qm1" map file: flat little-endian arrays for mmap-friendly reload.
//   "qm1" magic, u8 version, u8 sign (0 = -1, 1 = +1), u16 reserved,
//   u64 n, u64 seed, u32 root half-edge, u32 pointed vertex,
//   u32 twin[4n], u32 next[4n], i32 labels[n+2].
// Vertex numbering inside the file is canonical (by smallest incident
// half-edge), so origins are reconstructed from the rotation orbits on load
// and a rewrite of a loaded map is byte-identical.

inline constexpr unsigned char kQuadMapFormatVersion = 1;

inline std::string quadmap_to_bytes(const QuadMap& q) {
    std::string out;
    out += "qm1";
    out.push_back(static_cast<char>(kQuadMapFormatVersion));
    out.push_back(static_cast<char>(q.sign > 0 ? 1 : 0));
    out.push_back('\0');
    out.push_back('\0');
    detail::put_u64(out, q.n);
    detail::put_u64(out, q.seed);
    detail::put_u32(out, q.root_half_edge);
    detail::put_u32(out, q.pointed_vertex);
    for (std::uint32_t v : q.twin) detail::put_u32(out, v);
    for (std::uint32_t v : q.next) detail::put_u32(out, v);
    for (std::int32_t v : q.labels) detail::put_i32(out, v);
    return out;
}

inline QuadMap quadmap_from_bytes(const std::string& bytes) {
    detail::ByteReader r(bytes, "map");
    r.expect_magic("qm1", 3);
    const unsigned version = r.byte();
    if (version != kQuadMapFormatVersion) {
        throw DataError("map: unsupported format version " + std::to_string(version));
    }
    const unsigned sign_byte = r.byte();
    if (sign_byte > 1) throw DataError("map: bad sign byte");
    r.byte();
    r.byte();

    QuadMap q;
    q.sign = sign_byte == 1 ? std::int8_t{1} : std::int8_t{-1};
    const std::uint64_t n = r.u64();
    if (n < 1 || n > 0x3fffffffull) throw DataError("map: face count out of range");
    q.n = static_cast<std::uint32_t>(n);
    q.seed = r.u64();
    q.root_half_edge = r.u32();
    q.pointed_vertex = r.u32();
    q.twin.resize(q.half_edges());
    for (auto& v : q.twin) v = r.u32();
    q.next.resize(q.half_edges());
    for (auto& v : q.next) v = r.u32();
    q.labels.resize(q.vertices());
    for (auto& v : q.labels) v = r.i32();
    r.require_exhausted();

    // Rebuild origins from the rotation orbits; the orbit whose smallest
    // half-edge comes first gets the smallest vertex id, matching the
    // canonical numbering used at construction time.
    const std::uint32_t hcount = q.half_edges();
    q.origin.assign(hcount, kNoCorner);
    std::uint32_t next_id = 0;
    for (std::uint32_t h = 0; h < hcount; ++h) {
        if (q.origin[h] != kNoCorner) continue;
        if (next_id >= q.vertices()) throw DataError("map: more rotation orbits than vertices");
        std::uint32_t cur = h;
        do {
            if (cur >= hcount || q.next[cur] >= hcount) throw DataError("map: next out of range");
            q.origin[cur] = next_id;
            cur = q.next[cur];
        } while (cur != h);
        ++next_id;
    }
    if (next_id != q.vertices()) throw DataError("map: rotation orbits != vertex count");

    q.out_start.assign(q.vertices() + 1, 0);
    for (std::uint32_t h = 0; h < hcount; ++h) q.out_start[q.origin[h] + 1]++;
    for (std::uint32_t v = 0; v < q.vertices(); ++v) q.out_start[v + 1] += q.out_start[v];
    q.out_edges.resize(hcount);
    std::vector<std::uint32_t> cursor(q.out_start.begin(), q.out_start.end() - 1);
    for (std::uint32_t h = 0; h < hcount; ++h) q.out_edges[cursor[q.origin[h]]++] = h;

    check_quadmap(q);
    return q;
}

inline void save_quadmap(const QuadMap& q, const std::string& path) {
    detail::write_file(path, quadmap_to_bytes(q));
}

inline QuadMap load_quadmap(const std::string& path) {
    return quadmap_from_bytes(detail::read_file(path));
}

}  // namespace bmlab
