#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shmedge/detector.hpp"
#include "shmedge/model_io.hpp"
#include "shmedge/types.hpp"

namespace shmedge {

// Target-class MCU description plus the fitted constants of the footprint and
// latency models. Defaults describe the reference node: 1 MiB flash, 96 KiB
// SRAM, single-precision weights. Overhead and rate constants were fitted
// once against firmware measurements on that node and are documented in the
// README; they are model parameters, not datasheet values.
struct McuBudget {
    std::uint64_t flash_capacity_bytes = 1048576;
    std::uint64_t ram_capacity_bytes = 98304;
    double fixed_overhead_flash_bytes = 31204.0;
    double fixed_overhead_ram_bytes = 7660.40;
    double ram_per_sample_bytes = 2.4676;   // linear term in window dimension
    double ram_quad_bytes = 0.265572;       // quadratic term (scratch scales with M^2)
    double energy_per_mac_j = 2.31125e-9;
    double latency_overhead_s = 0.4944e-3;  // fixed per-window cost (filter, MSE, bookkeeping)
    double macs_per_s = 5.3930e6;
};

struct FootprintEstimate {
    double flash_bytes = 0.0;
    double ram_bytes = 0.0;
    bool fits = false;
};

// Flash holds the reconstruction matrix plus fixed firmware; RAM holds I/O
// and latent buffers plus the fitted working-set terms. matrix_in_ram moves
// the weight matrix into RAM as well (execute-from-RAM placement).
FootprintEstimate estimate_footprint(int input_dim, int k, int precision_bytes,
                                     const McuBudget& budget, bool matrix_in_ram = false);

struct InferenceCost {
    std::uint64_t macs = 0;  // the two rank-k projections only
    double energy_j = 0.0;   // includes per-sample filter/MSE work
    double latency_s = 0.0;
};

InferenceCost estimate_inference_cost(int input_dim, int k, const McuBudget& budget);

// Uplink energy model: a transmission burst pays a fixed session cost (radio
// wake, sync, attach) plus a per-packet marginal that grows with payload.
// Marginal anchors are interpolated linearly and clamped below the smallest
// anchor; payloads above max_payload_bytes are rejected.
struct RadioModel {
    struct Anchor {
        std::uint32_t payload_bytes;
        double energy_j;
    };
    std::vector<Anchor> marginal;  // ascending payload, non-decreasing energy
    double session_energy_j = 0.70;
    std::uint32_t max_payload_bytes = 1300;
    double e_sleep_per_hour_j = 0.390;

    double packet_energy_j(std::uint32_t payload_bytes) const;
    double burst_energy_j(std::uint64_t packets, std::uint32_t payload_bytes) const;

    static RadioModel nbiot_default();
    static RadioModel from_table(const std::vector<Anchor>& anchors, double session_j,
                                 std::uint32_t max_payload, double sleep_j_per_h);
};

enum class Scenario : std::uint8_t { cloud, hybrid, edge };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

// Per-scenario accounting constants. Energy-per-hour compute figures are
// node-side constants taken from reference measurements; they are
// configuration, not derived quantities.
struct CostModelConfig {
    std::uint32_t bytes_per_s_raw = 200;  // 100 Hz int16 stream
    std::uint32_t payload_bytes = 1300;
    std::uint32_t verdict_bytes = 3;
    double header_overhead_factor = 13.0 / 12.0;  // transport framing on raw uplink
    double gathering_j_per_h = 62.4;
    double storage_j_per_h = 1.0;  // hour buffer before bulk upload (cloud scenario)
    double compute_j_per_h_cloud = 1.208;
    double compute_j_per_h_inference = 0.005;
    double compute_j_per_h_edge_retrain = 0.00162;
    int verdicts_per_h = 1;  // transmission cadence at the default 60 min horizon
};

struct CostLedger {
    Scenario scenario = Scenario::edge;
    int hours = 0;
    std::uint64_t traffic_bytes = 0;           // application payload offered to the radio
    std::uint64_t traffic_overhead_bytes = 0;  // payload scaled by transport framing
    std::uint64_t packets = 0;
    double radio_energy_j = 0.0;  // sessions + packets + sleep
    double compute_energy_j = 0.0;
    double gathering_energy_j = 0.0;
    double storage_energy_j = 0.0;

    double total_energy_j() const {
        return radio_energy_j + compute_energy_j + gathering_energy_j + storage_energy_j;
    }
    double traffic_bytes_per_h() const { return hours > 0 ? double(traffic_bytes) / hours : 0.0; }
    double packets_per_h() const { return hours > 0 ? double(packets) / hours : 0.0; }
};

// Closed-form steady-state ledger. retrain_hours counts whole hours spent in
// the retrain phase: hybrid nodes stream raw during those hours, edge nodes
// stay silent and pay the local training compute figure; the cloud scenario
// is unaffected (training happens off-node).
CostLedger scenario_ledger(Scenario scenario, int hours, const RadioModel& radio,
                           const CostModelConfig& cfg, int retrain_hours = 0);

CostLedger scenario_ledger(Scenario scenario, int hours, const RadioModel& radio,
                           std::uint32_t payload_bytes, std::uint32_t bytes_per_s_raw,
                           std::uint32_t verdict_bytes);

enum class RetrainPolicy : std::uint8_t { never, scheduled, drift_triggered };

const char* to_string(RetrainPolicy p);
RetrainPolicy retrain_policy_from_string(const std::string& s);

struct SimConfig {
    int node_count = 1;
    Scenario scenario = Scenario::edge;
    int hours = 1;
    RetrainPolicy retrain_policy = RetrainPolicy::never;
    int retrain_period_h = 24;      // scheduled policy
    double drift_fraction = 0.5;    // drift policy: anomalous share that trips a retrain
    int drift_lookback_h = 6;
    int retrain_cooldown_h = 24;
    std::uint64_t seed = 0;
};

struct AlarmEvent {
    int node = 0;
    double interval_start_s = 0.0;
    Verdict verdict = Verdict::anomaly;  // anomaly or no_verdict; normals are not logged
};

struct RetrainEvent {
    int node = 0;
    int hour = 0;
};

struct FleetResult {
    std::vector<CostLedger> ledgers;  // one per node
    std::vector<AlarmEvent> alarms;   // ordered by (interval start, node)
    std::vector<RetrainEvent> retrains;
};

// Deterministic hour-by-hour replay: every node runs the full detection chain
// on its own trace; traffic and energy are accounted per scenario with the
// same constants as scenario_ledger, so static-policy runs reconcile with the
// closed form. Each trace must cover cfg.hours.
FleetResult simulate_fleet(const SimConfig& cfg, const ModelBundle& bundle, double input_dim_s,
                           int output_dim_minutes, const std::vector<AccelTrace>& traces,
                           const RadioModel& radio, const CostModelConfig& cost_cfg);

}  // namespace shmedge
