// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/trace_io.hpp"

#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace clcp {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'C', 'P', 'T', 'R', 'C', '1'};

void put_u16(std::FILE* f, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>(v >> 8)};
    std::fwrite(b, 1, 2, f);
}

void put_u32(std::FILE* f, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    std::fwrite(b, 1, 4, f);
}

void put_u64(std::FILE* f, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    std::fwrite(b, 1, 8, f);
}

std::uint16_t get_u16(std::FILE* f) {
    unsigned char b[2];
    if (std::fread(b, 1, 2, f) != 2) throw std::runtime_error("trace: truncated file");
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::FILE* f) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) throw std::runtime_error("trace: truncated file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::FILE* f) {
    unsigned char b[8];
    if (std::fread(b, 1, 8, f) != 8) throw std::runtime_error("trace: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_f32(std::FILE* f, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(f, bits);
}

float get_f32_from(const unsigned char* b) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

constexpr long kHeaderBytes = 8 + 4 + 2 + 2 + 4 + 4 + 4;

}  // namespace

struct TraceWriter::Impl {
    std::FILE* f = nullptr;
    TraceHeader hdr;
    bool closed = false;
};

TraceWriter::TraceWriter(const std::string& path, int antennas, int subcarriers, int link_count,
                         std::uint32_t sample_period_us)
    : impl_(new Impl) {
    if (antennas < 1 || antennas > 0xffff || subcarriers < 1 || subcarriers > 0xffff)
        throw std::invalid_argument("trace: dimensions out of range");
    if (link_count < 1) throw std::invalid_argument("trace: link count must be >= 1");
    impl_->f = std::fopen(path.c_str(), "wb");
    if (!impl_->f) {
        delete impl_;
        throw std::runtime_error("trace: cannot open for writing: " + path);
    }
    impl_->hdr.antennas = static_cast<std::uint16_t>(antennas);
    impl_->hdr.subcarriers = static_cast<std::uint16_t>(subcarriers);
    impl_->hdr.link_count = static_cast<std::uint32_t>(link_count);
    impl_->hdr.sample_period_us = sample_period_us;

    std::fwrite(kMagic, 1, 8, impl_->f);
    put_u32(impl_->f, impl_->hdr.version);
    put_u16(impl_->f, impl_->hdr.antennas);
    put_u16(impl_->f, impl_->hdr.subcarriers);
    put_u32(impl_->f, impl_->hdr.link_count);
    put_u32(impl_->f, 0);  // sample count, patched on close
    put_u32(impl_->f, impl_->hdr.sample_period_us);
}

TraceWriter::~TraceWriter() {
    try {
        close();
    } catch (...) {
    }
    delete impl_;
}

void TraceWriter::append_sample(const std::vector<Csi>& csis) {
    if (impl_->closed) throw std::runtime_error("trace: writer already closed");
    if (csis.size() != impl_->hdr.link_count)
        throw std::invalid_argument("trace: sample link count mismatch");
    for (const auto& c : csis) {
        if (c.antennas != impl_->hdr.antennas || c.subcarriers != impl_->hdr.subcarriers)
            throw std::invalid_argument("trace: CSI shape mismatch");
        put_u64(impl_->f, c.timestamp_us);
        for (const auto& v : c.values) {
            put_f32(impl_->f, static_cast<float>(v.real()));
            put_f32(impl_->f, static_cast<float>(v.imag()));
        }
    }
    ++impl_->hdr.sample_count;
}

void TraceWriter::close() {
    if (impl_->closed || !impl_->f) return;
    std::fseek(impl_->f, 8 + 4 + 2 + 2 + 4, SEEK_SET);
    put_u32(impl_->f, impl_->hdr.sample_count);
    std::fclose(impl_->f);
    impl_->f = nullptr;
    impl_->closed = true;
}

struct TraceReader::Impl {
    std::FILE* f = nullptr;
    TraceHeader hdr;
    SubcarrierGrid grid;
    long body_offset = 0;
    std::size_t sample_bytes = 0;
    std::size_t link_bytes = 0;

    void open(const std::string& path) {
        f = std::fopen(path.c_str(), "rb");
        if (!f) throw std::runtime_error("trace: cannot open: " + path);
        char magic[8];
        if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kMagic, 8) != 0)
            throw std::runtime_error("trace: bad magic: " + path);
        hdr.version = get_u32(f);
        if (hdr.version != 1) throw std::runtime_error("trace: unsupported version");
        hdr.antennas = get_u16(f);
        hdr.subcarriers = get_u16(f);
        hdr.link_count = get_u32(f);
        hdr.sample_count = get_u32(f);
        hdr.sample_period_us = get_u32(f);
        body_offset = kHeaderBytes;
        link_bytes = 8 + static_cast<std::size_t>(hdr.antennas) * hdr.subcarriers * 8;
        sample_bytes = link_bytes * hdr.link_count;
    }
};

TraceReader::TraceReader(const std::string& path, const SubcarrierGrid& grid) : impl_(new Impl) {
    try {
        impl_->open(path);
    } catch (...) {
        if (impl_->f) std::fclose(impl_->f);
        delete impl_;
        throw;
    }
    impl_->grid = grid;
    if (grid.antennas != impl_->hdr.antennas || grid.subcarriers != impl_->hdr.subcarriers) {
        std::fclose(impl_->f);
        delete impl_;
        throw std::invalid_argument("trace: supplied grid does not match header");
    }
}

TraceReader::TraceReader(const std::string& path) : impl_(new Impl) {
    try {
        impl_->open(path);
        int bw = 0;
        switch (impl_->hdr.subcarriers) {
            case 256: bw = 20; break;
            case 512: bw = 40; break;
            case 1024: bw = 80; break;
            case 2048: bw = 160; break;
            default:
                throw std::runtime_error("trace: cannot infer bandwidth, supply a grid");
        }
        impl_->grid = SubcarrierGrid::for_bandwidth(bw, impl_->hdr.antennas);
    } catch (...) {
        if (impl_->f) std::fclose(impl_->f);
        delete impl_;
        throw;
    }
}

TraceReader::~TraceReader() {
    if (impl_->f) std::fclose(impl_->f);
    delete impl_;
}

const TraceHeader& TraceReader::header() const { return impl_->hdr; }

std::vector<Csi> TraceReader::read_sample(std::uint32_t sample_index) {
    if (sample_index >= impl_->hdr.sample_count)
        throw std::out_of_range("trace: sample index out of range");
    std::fseek(impl_->f,
               impl_->body_offset + static_cast<long>(impl_->sample_bytes) * sample_index,
               SEEK_SET);
    std::vector<Csi> out;
    out.reserve(impl_->hdr.link_count);
    std::vector<unsigned char> buf(static_cast<std::size_t>(impl_->hdr.antennas) *
                                   impl_->hdr.subcarriers * 8);
    for (std::uint32_t li = 0; li < impl_->hdr.link_count; ++li) {
        Csi c = Csi::zeros(impl_->grid);
        c.timestamp_us = get_u64(impl_->f);
        if (std::fread(buf.data(), 1, buf.size(), impl_->f) != buf.size())
            throw std::runtime_error("trace: truncated body");
        for (std::size_t i = 0; i < c.values.size(); ++i)
            c.values[i] = {get_f32_from(&buf[i * 8]), get_f32_from(&buf[i * 8 + 4])};
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace clcp
