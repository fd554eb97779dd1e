#include "shmedge/deploy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shmedge/errors.hpp"
#include "shmedge/pipeline.hpp"
#include "shmedge/signal.hpp"

namespace shmedge {

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::cloud: return "cloud";
        case Scenario::hybrid: return "hybrid";
        case Scenario::edge: return "edge";
    }
    return "edge";
}

Scenario scenario_from_string(const std::string& s) {
    if (s == "cloud") return Scenario::cloud;
    if (s == "hybrid") return Scenario::hybrid;
    if (s == "edge") return Scenario::edge;
    throw ParameterError("unknown scenario '" + s + "'");
}

const char* to_string(RetrainPolicy p) {
    switch (p) {
        case RetrainPolicy::never: return "never";
        case RetrainPolicy::scheduled: return "scheduled";
        case RetrainPolicy::drift_triggered: return "drift-triggered";
    }
    return "never";
}

RetrainPolicy retrain_policy_from_string(const std::string& s) {
    if (s == "never") return RetrainPolicy::never;
    if (s == "scheduled") return RetrainPolicy::scheduled;
    if (s == "drift-triggered" || s == "drift") return RetrainPolicy::drift_triggered;
    throw ParameterError("unknown retrain policy '" + s + "'");
}

FootprintEstimate estimate_footprint(int input_dim, int k, int precision_bytes,
                                     const McuBudget& budget, bool matrix_in_ram) {
    if (input_dim < 1 || k < 1) throw ParameterError("dimensions must be positive");
    if (k > input_dim) throw ParameterError("latent dimension exceeds input dimension");
    if (precision_bytes != 4 && precision_bytes != 8) {
        throw ParameterError("precision must be 4 or 8 bytes");
    }
    const double m = input_dim;
    const double matrix_bytes = m * k * precision_bytes;
    const double buffers = precision_bytes * (2.0 * m + k);  // input, output, latent

    FootprintEstimate est;
    est.flash_bytes = budget.fixed_overhead_flash_bytes + matrix_bytes;
    est.ram_bytes = budget.fixed_overhead_ram_bytes + budget.ram_per_sample_bytes * m +
                    budget.ram_quad_bytes * m * m + buffers +
                    (matrix_in_ram ? matrix_bytes : 0.0);
    est.fits = est.flash_bytes <= static_cast<double>(budget.flash_capacity_bytes) &&
               est.ram_bytes <= static_cast<double>(budget.ram_capacity_bytes);
    return est;
}

InferenceCost estimate_inference_cost(int input_dim, int k, const McuBudget& budget) {
    if (input_dim < 1 || k < 1) throw ParameterError("dimensions must be positive");
    InferenceCost cost;
    cost.macs = 2ull * static_cast<std::uint64_t>(input_dim) * static_cast<std::uint64_t>(k);
    // the energy filter and the MSE each touch every sample once
    const double work = static_cast<double>(cost.macs) + 2.0 * input_dim;
    cost.energy_j = work * budget.energy_per_mac_j;
    cost.latency_s = budget.latency_overhead_s + work / budget.macs_per_s;
    return cost;
}

double RadioModel::packet_energy_j(std::uint32_t payload_bytes) const {
    if (marginal.empty()) throw ValidationError("radio model has no anchors");
    if (payload_bytes > max_payload_bytes) {
        throw ParameterError("payload " + std::to_string(payload_bytes) + " exceeds maximum " +
                             std::to_string(max_payload_bytes));
    }
    if (payload_bytes <= marginal.front().payload_bytes) return marginal.front().energy_j;
    for (std::size_t i = 1; i < marginal.size(); ++i) {
        if (payload_bytes <= marginal[i].payload_bytes) {
            const auto& a = marginal[i - 1];
            const auto& b = marginal[i];
            const double t = static_cast<double>(payload_bytes - a.payload_bytes) /
                             static_cast<double>(b.payload_bytes - a.payload_bytes);
            return a.energy_j + t * (b.energy_j - a.energy_j);
        }
    }
    return marginal.back().energy_j;
}

double RadioModel::burst_energy_j(std::uint64_t packets, std::uint32_t payload_bytes) const {
    if (packets == 0) return 0.0;
    return session_energy_j + static_cast<double>(packets) * packet_energy_j(payload_bytes);
}

RadioModel RadioModel::nbiot_default() {
    RadioModel radio;
    // anchors back out of three measured operating points: a short verdict
    // packet, the 500 B reference transmission, and the bulk hourly upload of
    // 554 max-size packets
    radio.marginal = {{10, 0.0130}, {500, 0.2400}, {1300, (248.85 - 0.70) / 554.0}};
    radio.session_energy_j = 0.70;
    radio.max_payload_bytes = 1300;
    radio.e_sleep_per_hour_j = 0.390;
    return radio;
}

RadioModel RadioModel::from_table(const std::vector<Anchor>& anchors, double session_j,
                                  std::uint32_t max_payload, double sleep_j_per_h) {
    if (anchors.empty()) throw ValidationError("need at least one anchor");
    for (std::size_t i = 1; i < anchors.size(); ++i) {
        if (anchors[i].payload_bytes <= anchors[i - 1].payload_bytes ||
            anchors[i].energy_j < anchors[i - 1].energy_j) {
            throw ValidationError("anchors must be strictly increasing in payload and "
                                  "non-decreasing in energy");
        }
    }
    RadioModel radio;
    radio.marginal = anchors;
    radio.session_energy_j = session_j;
    radio.max_payload_bytes = max_payload;
    radio.e_sleep_per_hour_j = sleep_j_per_h;
    return radio;
}

namespace {

struct HourCosts {
    std::uint64_t traffic = 0;
    std::uint64_t packets = 0;
    double radio_j = 0.0;  // sessions + packets, sleep added by the caller
    double compute_j = 0.0;
    double storage_j = 0.0;
};

HourCosts cloud_hour(const RadioModel& radio, const CostModelConfig& cfg,
                     std::uint64_t raw_bytes) {
    HourCosts h;
    h.traffic = raw_bytes;
    h.packets = (raw_bytes + cfg.payload_bytes - 1) / cfg.payload_bytes;
    h.radio_j = radio.burst_energy_j(h.packets, cfg.payload_bytes);
    h.compute_j = cfg.compute_j_per_h_cloud;
    h.storage_j = cfg.storage_j_per_h;
    return h;
}

HourCosts inference_hour(const RadioModel& radio, const CostModelConfig& cfg,
                         std::uint64_t verdicts) {
    HourCosts h;
    h.traffic = verdicts * cfg.verdict_bytes;
    h.packets = verdicts;  // one verdict per packet
    h.radio_j = radio.burst_energy_j(h.packets, cfg.verdict_bytes);
    h.compute_j = cfg.compute_j_per_h_inference;
    return h;
}

HourCosts edge_retrain_hour(const CostModelConfig& cfg) {
    HourCosts h;  // radio stays in PSM for the whole hour
    h.compute_j = cfg.compute_j_per_h_edge_retrain;
    return h;
}

void accumulate(CostLedger& ledger, const HourCosts& h, const CostModelConfig& cfg,
                const RadioModel& radio) {
    ledger.traffic_bytes += h.traffic;
    ledger.packets += h.packets;
    ledger.radio_energy_j += h.radio_j + radio.e_sleep_per_hour_j;
    ledger.compute_energy_j += h.compute_j;
    ledger.gathering_energy_j += cfg.gathering_j_per_h;
    ledger.storage_energy_j += h.storage_j;
}

}  // namespace

CostLedger scenario_ledger(Scenario scenario, int hours, const RadioModel& radio,
                           const CostModelConfig& cfg, int retrain_hours) {
    if (hours < 0) throw ParameterError("hours must be non-negative");
    if (retrain_hours < 0 || retrain_hours > hours) {
        throw ParameterError("retrain_hours outside [0, hours]");
    }
    if (cfg.payload_bytes == 0 || cfg.payload_bytes > radio.max_payload_bytes) {
        throw ParameterError("payload outside (0, radio maximum]");
    }

    const std::uint64_t raw_bytes = 3600ull * cfg.bytes_per_s_raw;
    const auto verdicts = static_cast<std::uint64_t>(std::max(cfg.verdicts_per_h, 0));

    CostLedger ledger;
    ledger.scenario = scenario;
    ledger.hours = hours;
    for (int h = 0; h < hours; ++h) {
        const bool retraining = h < retrain_hours;  // position is irrelevant to totals
        HourCosts costs;
        switch (scenario) {
            case Scenario::cloud:
                costs = cloud_hour(radio, cfg, raw_bytes);
                break;
            case Scenario::hybrid:
                costs = retraining ? cloud_hour(radio, cfg, raw_bytes)
                                   : inference_hour(radio, cfg, verdicts);
                break;
            case Scenario::edge:
                costs = retraining ? edge_retrain_hour(cfg)
                                   : inference_hour(radio, cfg, verdicts);
                break;
        }
        accumulate(ledger, costs, cfg, radio);
    }
    ledger.traffic_overhead_bytes = static_cast<std::uint64_t>(
        std::ceil(static_cast<double>(ledger.traffic_bytes) * cfg.header_overhead_factor));
    return ledger;
}

CostLedger scenario_ledger(Scenario scenario, int hours, const RadioModel& radio,
                           std::uint32_t payload_bytes, std::uint32_t bytes_per_s_raw,
                           std::uint32_t verdict_bytes) {
    CostModelConfig cfg;
    cfg.payload_bytes = payload_bytes;
    cfg.bytes_per_s_raw = bytes_per_s_raw;
    cfg.verdict_bytes = verdict_bytes;
    return scenario_ledger(scenario, hours, radio, cfg);
}

FleetResult simulate_fleet(const SimConfig& cfg, const ModelBundle& bundle, double input_dim_s,
                           int output_dim_minutes, const std::vector<AccelTrace>& traces,
                           const RadioModel& radio, const CostModelConfig& cost_cfg) {
    if (cfg.node_count < 1) throw ParameterError("need at least one node");
    if (cfg.hours < 1) throw ParameterError("need at least one hour");
    if (static_cast<int>(traces.size()) != cfg.node_count) {
        throw DimensionError("expected " + std::to_string(cfg.node_count) + " traces, got " +
                             std::to_string(traces.size()));
    }
    const double horizon_s = 3600.0 * cfg.hours;
    for (const auto& t : traces) {
        if (t.duration_s() + 1e-9 < horizon_s) {
            throw InsufficientDataError("trace covers " + std::to_string(t.duration_s()) +
                                        " s, simulation needs " + std::to_string(horizon_s));
        }
    }

    FleetResult result;
    result.ledgers.reserve(traces.size());

    struct NodeRun {
        std::vector<IntervalScore> intervals;
        std::vector<Verdict> verdicts;
        std::vector<bool> retrain_hour;
    };
    std::vector<NodeRun> runs(traces.size());

    for (std::size_t node = 0; node < traces.size(); ++node) {
        const auto& trace = traces[node];
        std::vector<Window> windows = windowize(trace, input_dim_s);
        // simulate exactly cfg.hours; drop windows past the horizon
        std::erase_if(windows, [&](const Window& w) {
            return static_cast<double>(w.origin_index) / trace.sample_rate_hz >= horizon_s;
        });
        const std::vector<ScorePoint> scores = score_pipeline(bundle, windows);
        runs[node].intervals = average_scores(scores, output_dim_minutes);
        runs[node].verdicts = classify(runs[node].intervals, bundle.detector);
        runs[node].retrain_hour.assign(static_cast<std::size_t>(cfg.hours), false);
    }

    // retrain schedule per node
    for (std::size_t node = 0; node < runs.size(); ++node) {
        auto& run = runs[node];
        if (cfg.retrain_policy == RetrainPolicy::scheduled) {
            if (cfg.retrain_period_h < 1) throw ParameterError("retrain period must be positive");
            for (int h = cfg.retrain_period_h - 1; h < cfg.hours; h += cfg.retrain_period_h) {
                run.retrain_hour[static_cast<std::size_t>(h)] = true;
                result.retrains.push_back({static_cast<int>(node), h});
            }
        } else if (cfg.retrain_policy == RetrainPolicy::drift_triggered) {
            int last_retrain = -1;
            for (int h = 0; h < cfg.hours; ++h) {
                if (last_retrain >= 0 && h - last_retrain <= cfg.retrain_cooldown_h) continue;
                const double lo = 3600.0 * std::max(0, h + 1 - cfg.drift_lookback_h);
                const double hi = 3600.0 * (h + 1);
                std::uint64_t anomalous = 0, decided = 0;
                for (std::size_t i = 0; i < run.intervals.size(); ++i) {
                    const double s = run.intervals[i].start_s;
                    if (s < lo || s >= hi || run.verdicts[i] == Verdict::no_verdict) continue;
                    ++decided;
                    if (run.verdicts[i] == Verdict::anomaly) ++anomalous;
                }
                if (decided > 0 &&
                    static_cast<double>(anomalous) / static_cast<double>(decided) >=
                        cfg.drift_fraction &&
                    h + 1 < cfg.hours) {
                    run.retrain_hour[static_cast<std::size_t>(h + 1)] = true;
                    result.retrains.push_back({static_cast<int>(node), h + 1});
                    last_retrain = h + 1;
                }
            }
        }
    }

    // hour-by-hour accounting with the same arithmetic as scenario_ledger
    for (std::size_t node = 0; node < runs.size(); ++node) {
        const auto& trace = traces[node];
        const auto& run = runs[node];
        CostLedger ledger;
        ledger.scenario = cfg.scenario;
        ledger.hours = cfg.hours;

        for (int h = 0; h < cfg.hours; ++h) {
            // raw int16 payload produced by the sensor this hour
            const auto first = static_cast<std::uint64_t>(
                std::llround(3600.0 * h * trace.sample_rate_hz));
            const auto last = std::min<std::uint64_t>(
                trace.samples.size(),
                static_cast<std::uint64_t>(std::llround(3600.0 * (h + 1) * trace.sample_rate_hz)));
            const std::uint64_t raw_bytes = 2 * (last - first);

            // verdict transmissions: one per interval starting in this hour
            std::uint64_t verdicts_sent = 0;
            for (std::size_t i = 0; i < run.intervals.size(); ++i) {
                const double s = run.intervals[i].start_s;
                if (s >= 3600.0 * h && s < 3600.0 * (h + 1) &&
                    run.verdicts[i] != Verdict::no_verdict) {
                    ++verdicts_sent;
                }
            }

            const bool retraining = run.retrain_hour[static_cast<std::size_t>(h)];
            HourCosts costs;
            switch (cfg.scenario) {
                case Scenario::cloud:
                    costs = cloud_hour(radio, cost_cfg, raw_bytes);
                    break;
                case Scenario::hybrid:
                    costs = retraining ? cloud_hour(radio, cost_cfg, raw_bytes)
                                       : inference_hour(radio, cost_cfg, verdicts_sent);
                    break;
                case Scenario::edge:
                    costs = retraining ? edge_retrain_hour(cost_cfg)
                                       : inference_hour(radio, cost_cfg, verdicts_sent);
                    break;
            }
            accumulate(ledger, costs, cost_cfg, radio);
        }
        ledger.traffic_overhead_bytes = static_cast<std::uint64_t>(std::ceil(
            static_cast<double>(ledger.traffic_bytes) * cost_cfg.header_overhead_factor));
        result.ledgers.push_back(ledger);

        for (std::size_t i = 0; i < run.intervals.size(); ++i) {
            if (run.verdicts[i] == Verdict::normal) continue;
            result.alarms.push_back(
                {static_cast<int>(node), run.intervals[i].start_s, run.verdicts[i]});
        }
    }

    std::stable_sort(result.alarms.begin(), result.alarms.end(),
                     [](const AlarmEvent& a, const AlarmEvent& b) {
                         return a.interval_start_s != b.interval_start_s
                                    ? a.interval_start_s < b.interval_start_s
                                    : a.node < b.node;
                     });
    std::stable_sort(result.retrains.begin(), result.retrains.end(),
                     [](const RetrainEvent& a, const RetrainEvent& b) {
                         return a.hour != b.hour ? a.hour < b.hour : a.node < b.node;
                     });
    return result;
}

}  // namespace shmedge
