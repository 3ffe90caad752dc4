#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kpifc/json.hpp"

namespace kpifc {

enum class Regime { Los = 0, Nlos = 1, Disconnected = 2 };

// Affine derivation of an auxiliary feature from SINR: value = scale * sinr
// + offset + N(0, noise).
struct DerivedFeature {
    std::string name;
    double scale = 1.0;
    double offset = 0.0;
    double noise = 0.0;
};

// Semi-Markov regime chain over {LOS, NLOS, disconnected} with geometric
// dwell times; SINR follows an AR(1) process around the active regime mean.
// Disconnected seconds emit records with an empty `ues` array, so the KPI
// fields are absent and extraction produces Missing, the same path real
// logs take.
struct TraceConfig {
    long duration = 3600; // seconds
    std::uint64_t seed = 0;
    double los_mean_sinr = 10.0; // dB
    double nlos_mean_sinr = 7.0; // dB
    double ar_coeff = 0.05;
    double noise_sigma = 2.0;
    double los_dwell_mean = 30.0;  // seconds
    double nlos_dwell_mean = 20.0; // seconds
    double disc_dwell_mean = 3.0;  // seconds; 0 disables disconnections
    std::vector<DerivedFeature> derived; // optional rssi/phr/mcs style features

    void validate() const;
};

// Built-in derivations for the standard auxiliary KPI names.
DerivedFeature default_derived_feature(const std::string& name);

struct Trace {
    JsonNode document;           // array of per-second records with a `ues` list
    std::vector<Regime> regimes; // ground truth, one entry per second
    std::vector<double> sinr;    // ground truth SINR; Missing on disconnected seconds
};

Trace generate_trace(const TraceConfig& cfg);

// Regime sequence alone (used by occupancy checks and by generate_trace).
std::vector<Regime> simulate_regimes(const TraceConfig& cfg, std::uint64_t seed);

// Serializes the trace document as UTF-8 JSON; byte-identical for identical
// configs and round-trips through load_document.
void write_trace(const JsonNode& document, const std::string& path);

// Ground-truth sidecar: one row per second with the regime label and true SINR.
void write_regime_csv(const Trace& trace, const std::string& path);

const char* regime_name(Regime r);

} // namespace kpifc
