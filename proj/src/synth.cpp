#include "kpifc/synth.hpp"

#include <cmath>

#include "kpifc/extract.hpp"
#include "kpifc/rng.hpp"

namespace kpifc {

void TraceConfig::validate() const {
    if (duration < 1) throw ConfigError("synth: duration must be >= 1 s");
    if (!(los_mean_sinr > nlos_mean_sinr))
        throw ConfigError("synth: LOS mean SINR must exceed NLOS mean");
    if (!(ar_coeff > -1.0 && ar_coeff < 1.0))
        throw ConfigError("synth: AR coefficient must be in (-1, 1)");
    if (noise_sigma < 0.0) throw ConfigError("synth: noise sigma must be >= 0");
    if (los_dwell_mean < 1.0 || nlos_dwell_mean < 1.0)
        throw ConfigError("synth: connected dwell means must be >= 1 s");
    if (disc_dwell_mean != 0.0 && disc_dwell_mean < 1.0)
        throw ConfigError("synth: disconnected dwell mean must be 0 (disabled) or >= 1 s");
    for (const auto& f : derived) {
        if (f.name.empty()) throw ConfigError("synth: derived feature needs a name");
        if (f.noise < 0.0) throw ConfigError("synth: derived feature noise must be >= 0");
    }
}

DerivedFeature default_derived_feature(const std::string& name) {
    if (name == "rssi") return {"rssi", 1.2, -90.0, 0.5};
    if (name == "phr") return {"phr", 0.5, 10.0, 0.3};
    if (name == "mcs") return {"mcs", 0.9, 3.0, 0.8};
    throw ConfigError("synth: unknown derived feature '" + name + "'");
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Los: return "LOS";
        case Regime::Nlos: return "NLOS";
        case Regime::Disconnected: return "DISC";
    }
    return "?";
}

std::vector<Regime> simulate_regimes(const TraceConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    const bool with_disc = cfg.disc_dwell_mean > 0.0;
    std::vector<Regime> regimes;
    regimes.reserve(static_cast<std::size_t>(cfg.duration));

    Regime state = Regime::Los;
    while (static_cast<long>(regimes.size()) < cfg.duration) {
        double mean = 0.0;
        switch (state) {
            case Regime::Los: mean = cfg.los_dwell_mean; break;
            case Regime::Nlos: mean = cfg.nlos_dwell_mean; break;
            case Regime::Disconnected: mean = cfg.disc_dwell_mean; break;
        }
        const long dwell = rng.geometric_dwell(mean);
        for (long i = 0; i < dwell && static_cast<long>(regimes.size()) < cfg.duration; ++i)
            regimes.push_back(state);

        // Jump to one of the other regimes with equal probability, so the
        // embedded chain is symmetric and occupancy is proportional to the
        // dwell means.
        if (!with_disc) {
            state = state == Regime::Los ? Regime::Nlos : Regime::Los;
        } else {
            const std::uint64_t pick = rng.below(2);
            switch (state) {
                case Regime::Los: state = pick ? Regime::Nlos : Regime::Disconnected; break;
                case Regime::Nlos: state = pick ? Regime::Los : Regime::Disconnected; break;
                case Regime::Disconnected: state = pick ? Regime::Los : Regime::Nlos; break;
            }
        }
    }
    return regimes;
}

Trace generate_trace(const TraceConfig& cfg) {
    cfg.validate();
    Trace trace;
    trace.regimes = simulate_regimes(cfg, derive_seed(cfg.seed, "regimes"));
    trace.sinr.reserve(trace.regimes.size());

    Rng rng(derive_seed(cfg.seed, "kpi"));
    JsonNode records = JsonNode::array();
    double prev_sinr = cfg.los_mean_sinr;
    for (std::size_t t = 0; t < trace.regimes.size(); ++t) {
        JsonNode record = JsonNode::object();
        record.set("timestamp", JsonNode(static_cast<double>(t)));
        JsonNode ues = JsonNode::array();
        const Regime regime = trace.regimes[t];
        if (regime == Regime::Disconnected) {
            trace.sinr.push_back(kMissing);
        } else {
            const double mean =
                regime == Regime::Los ? cfg.los_mean_sinr : cfg.nlos_mean_sinr;
            const double sinr =
                mean + cfg.ar_coeff * (prev_sinr - mean) + rng.normal(0.0, cfg.noise_sigma);
            prev_sinr = sinr;
            trace.sinr.push_back(sinr);
            JsonNode ue = JsonNode::object();
            ue.set("id", JsonNode(0.0));
            ue.set("sinr", JsonNode(sinr));
            for (const auto& f : cfg.derived)
                ue.set(f.name, JsonNode(f.scale * sinr + f.offset + rng.normal(0.0, f.noise)));
            ues.push_back(std::move(ue));
        }
        record.set("ues", std::move(ues));
        records.push_back(std::move(record));
    }
    trace.document = std::move(records);
    return trace;
}

void write_trace(const JsonNode& document, const std::string& path) {
    write_file(path, write_json(document, {.indent = 1}) + "\n");
}

void write_regime_csv(const Trace& trace, const std::string& path) {
    std::string out = "time,regime,sinr\n";
    for (std::size_t t = 0; t < trace.regimes.size(); ++t) {
        out += std::to_string(t);
        out.push_back(',');
        out += regime_name(trace.regimes[t]);
        out.push_back(',');
        if (!is_missing(trace.sinr[t])) out += format_double(trace.sinr[t]);
        out.push_back('\n');
    }
    write_file(path, out);
}

} // namespace kpifc
