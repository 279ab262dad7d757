#pragma once

// Binary checkpoint, little-endian:
//   "FMHD" | version u32 | n u32 | box_length f64 | time f64
//   then v, B, m coefficient cubes, each as interleaved f64 (re, im) in
//   (component, kx, ky, kz) order with kz fastest.
// The dealias fraction is not stored; readers supply it.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "fmhd/field.hpp"

namespace fmhd {

inline constexpr std::uint32_t checkpoint_version = 1;

namespace detail {

template <class T>
void put_le(std::vector<unsigned char>& out, T value) {
    static_assert(sizeof(T) == 4 || sizeof(T) == 8);
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<unsigned char>(bits >> (8 * b)));
}

template <class T>
T get_le(const std::vector<unsigned char>& in, std::size_t& pos) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    if (pos + sizeof(T) > in.size()) throw Error("checkpoint: truncated file");
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) bits |= static_cast<U>(in[pos + b]) << (8 * b);
    pos += sizeof(T);
    return std::bit_cast<T>(bits);
}

}  // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const StateVector& s) {
    s.check_grids();
    const Grid& g = s.grid();
    std::vector<unsigned char> out;
    out.reserve(32 + 3 * 3 * g.cube_size() * 16);
    for (char c : {'F', 'M', 'H', 'D'}) out.push_back(static_cast<unsigned char>(c));
    detail::put_le(out, checkpoint_version);
    detail::put_le(out, static_cast<std::uint32_t>(g.n()));
    detail::put_le(out, g.box_length());
    detail::put_le(out, s.time);
    for (const SpectralField* f : {&s.v, &s.B, &s.m})
        for (const cplx& c : f->coeffs()) {
            detail::put_le(out, c.real());
            detail::put_le(out, c.imag());
        }
    return out;
}

inline StateVector decode_checkpoint(const std::vector<unsigned char>& bytes, double dealias_fraction = 2.0 / 3.0) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "FMHD", 4) != 0) throw Error("checkpoint: bad magic");
    std::size_t pos = 4;
    const auto version = detail::get_le<std::uint32_t>(bytes, pos);
    if (version != checkpoint_version) throw Error("checkpoint: unsupported version " + std::to_string(version));
    const auto n = detail::get_le<std::uint32_t>(bytes, pos);
    const auto box = detail::get_le<double>(bytes, pos);
    const auto time = detail::get_le<double>(bytes, pos);
    StateVector s(Grid(n, box, dealias_fraction), time);
    const std::size_t expected = pos + 3 * 3 * s.grid().cube_size() * 16;
    if (bytes.size() != expected) throw Error("checkpoint: size mismatch");
    for (SpectralField* f : {&s.v, &s.B, &s.m})
        for (cplx& c : f->coeffs()) {
            const double re = detail::get_le<double>(bytes, pos);
            const double im = detail::get_le<double>(bytes, pos);
            c = cplx(re, im);
        }
    return s;
}

inline void write_checkpoint(const std::filesystem::path& path, const StateVector& s) {
    const auto bytes = encode_checkpoint(s);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("checkpoint: cannot open " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("checkpoint: write failed for " + path.string());
}

inline StateVector read_checkpoint(const std::filesystem::path& path, double dealias_fraction = 2.0 / 3.0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("checkpoint: cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes, dealias_fraction);
}

}  // namespace fmhd
