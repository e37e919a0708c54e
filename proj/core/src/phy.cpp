// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include "clcp/phy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace clcp {

namespace {

double q_func(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace

double evm_db(const Csi& pred, const Csi& gt) {
    if (pred.antennas != gt.antennas || pred.subcarriers != gt.subcarriers)
        throw std::invalid_argument("evm_db: shape mismatch");
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < gt.values.size(); ++i) {
        err += std::norm(pred.values[i] - gt.values[i]);
        ref += std::norm(gt.values[i]);
    }
    if (ref <= 0.0) throw std::invalid_argument("evm_db: zero-power ground truth");
    if (err <= 0.0) return -100.0;
    return std::max(-100.0, 10.0 * std::log10(err / ref));
}

std::vector<double> snr_per_subcarrier(const Csi& csi, double tx_power, double noise_power) {
    if (!(noise_power > 0.0))
        throw std::invalid_argument("snr_per_subcarrier: noise power must be > 0");
    std::vector<double> snr(csi.subcarriers, 0.0);
    for (int s = 0; s < csi.subcarriers; ++s) {
        double p = 0.0;
        for (int m = 0; m < csi.antennas; ++m) p += std::norm(csi.at(m, s));
        snr[s] = tx_power * p / noise_power;
    }
    return snr;
}

int modulation_order(Modulation m) {
    switch (m) {
        case Modulation::BPSK: return 2;
        case Modulation::QPSK: return 4;
        case Modulation::QAM16: return 16;
        case Modulation::QAM64: return 64;
        case Modulation::QAM256: return 256;
        case Modulation::QAM1024: return 1024;
    }
    throw std::invalid_argument("modulation_order: bad modulation");
}

int bits_per_symbol(Modulation m) {
    int order = modulation_order(m);
    int b = 0;
    while (order > 1) {
        order >>= 1;
        ++b;
    }
    return b;
}

double ber_awgn(Modulation m, double snr_linear) {
    if (snr_linear <= 0.0) return 0.5;
    double ber;
    if (m == Modulation::BPSK) {
        ber = q_func(std::sqrt(2.0 * snr_linear));
    } else {
        const double order = modulation_order(m);
        const double b = bits_per_symbol(m);
        ber = (4.0 / b) * (1.0 - 1.0 / std::sqrt(order)) *
              q_func(std::sqrt(3.0 * snr_linear / (order - 1.0)));
    }
    return std::min(0.5, std::max(0.0, ber));
}

double ber_inverse(Modulation m, double ber) {
    if (!(ber > 0.0 && ber < 0.5))
        throw std::invalid_argument("ber_inverse: ber must be in (0, 0.5)");
    double lo = 1e-9, hi = 1e12;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);  // geometric bisection
        if (ber_awgn(m, mid) > ber)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

double esnr_db(const std::vector<double>& snrs_linear, Modulation m) {
    if (snrs_linear.empty()) throw std::invalid_argument("esnr_db: empty SNR vector");
    double mean_ber = 0.0;
    for (double s : snrs_linear) mean_ber += ber_awgn(m, s);
    mean_ber /= static_cast<double>(snrs_linear.size());
    if (mean_ber <= 0.0) return 10.0 * std::log10(1e12);
    if (mean_ber >= 0.5) return 10.0 * std::log10(1e-9);
    return 10.0 * std::log10(ber_inverse(m, mean_ber));
}

// ------------------------------------------------------------------- MCS

namespace {

struct McsShape {
    Modulation mod;
    int num, den;
};

constexpr McsShape kLadder[12] = {
    {Modulation::BPSK, 1, 2},    {Modulation::QPSK, 1, 2},    {Modulation::QPSK, 3, 4},
    {Modulation::QAM16, 1, 2},   {Modulation::QAM16, 3, 4},   {Modulation::QAM64, 2, 3},
    {Modulation::QAM64, 3, 4},   {Modulation::QAM64, 5, 6},   {Modulation::QAM256, 3, 4},
    {Modulation::QAM256, 5, 6},  {Modulation::QAM1024, 3, 4}, {Modulation::QAM1024, 5, 6},
};

// Fixed coding gains per coding rate (dB). The values keep the calibrated
// threshold ladder strictly increasing.
double coding_gain_db(int num, int den) {
    if (num == 1 && den == 2) return 5.5;
    if (num == 2 && den == 3) return 4.5;
    if (num == 3 && den == 4) return 4.0;
    if (num == 5 && den == 6) return 3.0;
    throw std::invalid_argument("coding_gain_db: unknown coding rate");
}

const char* modulation_name(Modulation m) {
    switch (m) {
        case Modulation::BPSK: return "BPSK";
        case Modulation::QPSK: return "QPSK";
        case Modulation::QAM16: return "16-QAM";
        case Modulation::QAM64: return "64-QAM";
        case Modulation::QAM256: return "256-QAM";
        case Modulation::QAM1024: return "1024-QAM";
    }
    return "?";
}

Modulation modulation_from_name(const std::string& s) {
    if (s == "BPSK") return Modulation::BPSK;
    if (s == "QPSK") return Modulation::QPSK;
    if (s == "16-QAM") return Modulation::QAM16;
    if (s == "64-QAM") return Modulation::QAM64;
    if (s == "256-QAM") return Modulation::QAM256;
    if (s == "1024-QAM") return Modulation::QAM1024;
    throw std::invalid_argument("mcs table: unknown modulation " + s);
}

}  // namespace

McsTable calibrate_mcs_table() {
    McsTable table;
    std::vector<McsEntry>& entries = table.entries_;
    constexpr std::int64_t kCalPacketBits = 1500 * 8;
    constexpr double kCalTargetPer = 1e-2;
    for (int i = 0; i < 12; ++i) {
        McsEntry e;
        e.index = i;
        e.modulation = kLadder[i].mod;
        e.code_num = kLadder[i].num;
        e.code_den = kLadder[i].den;
        e.bits_per_tone = bits_per_symbol(e.modulation) * e.coding_rate();
        e.coding_gain_db = coding_gain_db(e.code_num, e.code_den);

        // Smallest flat-channel SNR meeting PER <= 1e-2 at 1500 bytes,
        // found by bisection on the monotone PER model.
        double lo_db = -10.0, hi_db = 60.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo_db + hi_db);
            const std::vector<double> flat(1, std::pow(10.0, mid / 10.0));
            if (packet_error_rate(e, flat, kCalPacketBits) > kCalTargetPer)
                lo_db = mid;
            else
                hi_db = mid;
        }
        e.esnr_threshold_db = hi_db;
        entries.push_back(e);
    }
    table.validate();
    return table;
}

const McsTable& McsTable::builtin() {
    static const McsTable table = calibrate_mcs_table();
    return table;
}

const McsEntry& McsTable::entry(int index) const {
    if (index < 0 || index >= static_cast<int>(entries_.size()))
        throw std::out_of_range("McsTable: index out of range");
    return entries_[index];
}

void McsTable::validate() const {
    if (entries_.empty()) throw std::invalid_argument("McsTable: empty");
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (!(entries_[i].esnr_threshold_db > entries_[i - 1].esnr_threshold_db))
            throw std::invalid_argument("McsTable: thresholds not strictly increasing");
        if (!(entries_[i].bits_per_tone > entries_[i - 1].bits_per_tone))
            throw std::invalid_argument("McsTable: rates not strictly increasing");
    }
}

void McsTable::to_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("McsTable: cannot write " + path);
    out << "# index modulation code_rate bits_per_tone esnr_threshold_db coding_gain_db\n";
    out << "# Thresholds: minimum flat-channel SNR with PER <= 1e-2 at 1500-byte packets\n";
    char line[160];
    for (const auto& e : entries_) {
        std::snprintf(line, sizeof(line), "%d %s %d/%d %.6f %.4f %.2f\n", e.index,
                      modulation_name(e.modulation), e.code_num, e.code_den, e.bits_per_tone,
                      e.esnr_threshold_db, e.coding_gain_db);
        out << line;
    }
}

McsTable McsTable::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("McsTable: cannot open " + path);
    McsTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        McsEntry e;
        std::string mod, rate;
        if (!(ss >> e.index >> mod >> rate >> e.bits_per_tone >> e.esnr_threshold_db >>
              e.coding_gain_db))
            throw std::runtime_error("McsTable: malformed row: " + line);
        e.modulation = modulation_from_name(mod);
        const auto slash = rate.find('/');
        if (slash == std::string::npos)
            throw std::runtime_error("McsTable: malformed coding rate: " + rate);
        e.code_num = std::stoi(rate.substr(0, slash));
        e.code_den = std::stoi(rate.substr(slash + 1));
        table.entries_.push_back(e);
    }
    table.validate();
    return table;
}

int select_mcs(const std::vector<double>& snrs_linear, const McsTable& table) {
    int best = 0;
    for (int i = 0; i < table.size(); ++i) {
        const McsEntry& e = table.entry(i);
        if (esnr_db(snrs_linear, e.modulation) >= e.esnr_threshold_db) best = e.index;
    }
    return best;
}

int select_mcs(const Csi& csi, double tx_power, double noise_power, const McsTable& table) {
    return select_mcs(snr_per_subcarrier(csi, tx_power, noise_power), table);
}

double packet_error_rate(const McsEntry& mcs, const std::vector<double>& snrs_linear,
                         std::int64_t length_bits) {
    if (length_bits <= 0) throw std::invalid_argument("packet_error_rate: length must be > 0");
    if (snrs_linear.empty()) throw std::invalid_argument("packet_error_rate: empty SNR vector");
    const double gain = std::pow(10.0, mcs.coding_gain_db / 10.0);
    double ber = 0.0;
    for (double s : snrs_linear) ber += ber_awgn(mcs.modulation, s * gain);
    ber /= static_cast<double>(snrs_linear.size());
    if (ber <= 0.0) return 0.0;
    // 1 - (1-ber)^n computed stably for tiny ber.
    return -std::expm1(static_cast<double>(length_bits) * std::log1p(-std::min(ber, 0.999999)));
}

}  // namespace clcp
