// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#include <doctest.h>

#include <cmath>

#include "clcp/phy.hpp"
#include "test_util.hpp"

using namespace clcp;

TEST_SUITE_BEGIN("phy");

namespace {

Csi constant_csi(const SubcarrierGrid& g, std::complex<double> v) {
    Csi c = Csi::zeros(g);
    for (auto& x : c.values) x = v;
    return c;
}

}  // namespace

TEST_CASE("evm definition and clamp") {
    const SubcarrierGrid g = test::tiny_grid(2, 16);
    const Csi gt = constant_csi(g, {1.0, 0.0});
    CHECK(evm_db(gt, gt) == doctest::Approx(-100.0));

    Csi pred = gt;
    const double delta = std::sqrt(0.1);
    for (auto& v : pred.values) v += delta;
    CHECK(evm_db(pred, gt) == doctest::Approx(-10.0).epsilon(1e-9));

    // A 20% error power lands inside the BPSK admissibility band (-10, -5).
    Csi bpskish = gt;
    for (auto& v : bpskish.values) v += std::sqrt(0.2);
    const double e = evm_db(bpskish, gt);
    CHECK(e > -10.0);
    CHECK(e < -5.0);

    const Csi zero = Csi::zeros(g);
    CHECK_THROWS(evm_db(pred, zero));
}

TEST_CASE("evm is invariant to a common complex scale") {
    Rng rng(8);
    const SubcarrierGrid g = test::tiny_grid(2, 12);
    Csi gt = Csi::zeros(g), pred = Csi::zeros(g);
    for (std::size_t i = 0; i < gt.values.size(); ++i) {
        gt.values[i] = {rng.normal(), rng.normal()};
        pred.values[i] = gt.values[i] + std::complex<double>{0.1 * rng.normal(), 0.1 * rng.normal()};
    }
    const double base = evm_db(pred, gt);
    const std::complex<double> c{-0.7, 2.3};
    Csi gt2 = gt, pred2 = pred;
    for (auto& v : gt2.values) v *= c;
    for (auto& v : pred2.values) v *= c;
    CHECK(evm_db(pred2, gt2) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("per-subcarrier snr") {
    const SubcarrierGrid g = test::tiny_grid(4, 8);
    const Csi csi = constant_csi(g, {1.0, 0.0});
    const auto snr = snr_per_subcarrier(csi, 1.0, 1.0);
    for (double s : snr) CHECK(s == doctest::Approx(4.0));
    const auto snr10 = snr_per_subcarrier(csi, 1.0, 10.0);
    for (int i = 0; i < g.subcarriers; ++i)
        CHECK(snr10[i] == doctest::Approx(snr[i] / 10.0));
    CHECK_THROWS(snr_per_subcarrier(csi, 1.0, 0.0));
}

TEST_CASE("flat and faded channels of equal power share the mean snr") {
    const SubcarrierGrid g = test::tiny_grid(1, 16);
    Csi flat = constant_csi(g, {1.0, 0.0});
    Csi faded = Csi::zeros(g);
    Rng rng(3);
    for (auto& v : faded.values) v = {rng.normal(), rng.normal()};
    double p = 0.0;
    for (auto& v : faded.values) p += std::norm(v);
    const double scale = std::sqrt(g.subcarriers / p);
    for (auto& v : faded.values) v *= scale;

    auto mean = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        return m / v.size();
    };
    CHECK(mean(snr_per_subcarrier(flat, 2.0, 0.5)) ==
          doctest::Approx(mean(snr_per_subcarrier(faded, 2.0, 0.5))));
}

TEST_CASE("ber formulas are sane and invertible") {
    CHECK(ber_awgn(Modulation::BPSK, 0.0) == doctest::Approx(0.5));
    CHECK(ber_awgn(Modulation::QPSK, 1e9) < 1e-12);
    for (Modulation m : {Modulation::BPSK, Modulation::QPSK, Modulation::QAM16,
                         Modulation::QAM64, Modulation::QAM256, Modulation::QAM1024}) {
        for (double ber : {1e-2, 1e-4, 1e-6}) {
            const double snr = ber_inverse(m, ber);
            CHECK(ber_awgn(m, snr) == doctest::Approx(ber).epsilon(1e-6));
        }
    }
    CHECK_THROWS(ber_inverse(Modulation::QPSK, 0.6));
}

TEST_CASE("esnr equals snr exactly on a flat channel") {
    const std::vector<double> flat(32, std::pow(10.0, 1.5));  // 15 dB
    for (Modulation m : {Modulation::BPSK, Modulation::QAM16, Modulation::QAM64})
        CHECK(esnr_db(flat, m) == doctest::Approx(15.0).epsilon(1e-9));
}

TEST_CASE("mcs table is calibrated, monotone and auditable") {
    const McsTable& t = McsTable::builtin();
    REQUIRE(t.size() == 12);
    CHECK_NOTHROW(t.validate());
    CHECK(t.entry(0).bits_per_tone == doctest::Approx(0.5));
    CHECK(t.entry(11).bits_per_tone == doctest::Approx(10.0 * 5.0 / 6.0));

    // The distributed text table matches the calibration routine.
    const McsTable from_file = McsTable::from_file(CLCP_MCS_TABLE_FILE);
    REQUIRE(from_file.size() == t.size());
    for (int i = 0; i < t.size(); ++i) {
        CHECK(from_file.entry(i).esnr_threshold_db ==
              doctest::Approx(t.entry(i).esnr_threshold_db).epsilon(1e-3));
        CHECK(from_file.entry(i).bits_per_tone ==
              doctest::Approx(t.entry(i).bits_per_tone).epsilon(1e-6));
    }

    // Thresholds mean what they claim: PER <= 1e-2 at threshold, > 1e-2
    // half a dB below.
    for (int i = 0; i < t.size(); ++i) {
        const McsEntry& e = t.entry(i);
        const std::vector<double> at(1, std::pow(10.0, e.esnr_threshold_db / 10.0));
        CHECK(packet_error_rate(e, at, 12000) <= 1e-2 + 1e-6);
        const std::vector<double> below(1, std::pow(10.0, (e.esnr_threshold_db - 0.5) / 10.0));
        CHECK(packet_error_rate(e, below, 12000) > 1e-2);
    }
}

TEST_CASE("mcs selection follows the esnr thresholds") {
    const McsTable& t = McsTable::builtin();
    CHECK(select_mcs(std::vector<double>(8, 1e12), t) == 11);
    CHECK(select_mcs(std::vector<double>(8, 0.0), t) == 0);

    // Monotone: uniformly raising the SNR never lowers the index.
    Rng rng(12);
    std::vector<double> snrs(16);
    for (auto& s : snrs) s = std::pow(10.0, rng.uniform(0.0, 3.0));
    int prev = -1;
    for (double boost : {1.0, 2.0, 4.0, 16.0, 64.0, 512.0}) {
        std::vector<double> scaled = snrs;
        for (auto& s : scaled) s *= boost;
        const int idx = select_mcs(scaled, t);
        CHECK(idx >= prev);
        prev = idx;
    }
}

TEST_CASE("packet error rate model") {
    const McsEntry& mcs0 = McsTable::builtin().entry(0);
    CHECK(packet_error_rate(mcs0, std::vector<double>(4, 1e12), 12000) == doctest::Approx(0.0));
    // BER 0.5 and a single bit: PER = 0.5 (zero SNR defeats any coding gain).
    CHECK(packet_error_rate(mcs0, std::vector<double>(4, 0.0), 1) == doctest::Approx(0.5));
    CHECK_THROWS(packet_error_rate(mcs0, std::vector<double>(4, 1.0), 0));

    // Monotone non-increasing in SNR.
    double prev = 1.0;
    for (double db = -5.0; db <= 30.0; db += 0.5) {
        const double per =
            packet_error_rate(mcs0, std::vector<double>(4, std::pow(10.0, db / 10.0)), 12000);
        CHECK(per <= prev + 1e-12);
        prev = per;
    }
}

TEST_SUITE_END();
