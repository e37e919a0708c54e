// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clcp/csi.hpp"

namespace clcp {

// Binary channel trace, little-endian throughout:
//
//   header: magic "CLCPTRC1", version u32, antennas u16, subcarriers u16,
//           link_count u32, sample_count u32, sample_period_us u32
//   body:   per (sample, link): timestamp u64 (microseconds), then
//           antennas*subcarriers complex values as float32 (real, imag)
//           pairs, row-major by antenna.
//
// The file carries no frequency metadata; readers supply the grid (the
// environment snapshot written next to a trace records it).
struct TraceHeader {
    std::uint32_t version = 1;
    std::uint16_t antennas = 0;
    std::uint16_t subcarriers = 0;
    std::uint32_t link_count = 0;
    std::uint32_t sample_count = 0;
    std::uint32_t sample_period_us = 0;
};

class TraceWriter {
  public:
    // The header is rewritten with the final sample count on close.
    TraceWriter(const std::string& path, int antennas, int subcarriers, int link_count,
                std::uint32_t sample_period_us);
    ~TraceWriter();

    TraceWriter(const TraceWriter&) = delete;
    TraceWriter& operator=(const TraceWriter&) = delete;

    // Appends one time instant; `csis` must hold link_count entries.
    void append_sample(const std::vector<Csi>& csis);

    void close();

  private:
    struct Impl;
    Impl* impl_;
};

class TraceReader {
  public:
    explicit TraceReader(const std::string& path, const SubcarrierGrid& grid);
    // Grid inferred from the stored subcarrier count (default band plan,
    // 5.25 GHz center).
    explicit TraceReader(const std::string& path);
    ~TraceReader();

    TraceReader(const TraceReader&) = delete;
    TraceReader& operator=(const TraceReader&) = delete;

    const TraceHeader& header() const;

    // CSIs of all links at one sample index, fully observed.
    std::vector<Csi> read_sample(std::uint32_t sample_index);

  private:
    struct Impl;
    Impl* impl_;
};

}  // namespace clcp
