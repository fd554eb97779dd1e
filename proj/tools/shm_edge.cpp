// shm-edge: batch front end for the vibration anomaly-detection pipeline.
//
// Subcommands: gen, train, detect, sweep, inject, cost, simulate.
// A JSON config file (--config) provides defaults; every key has a matching
// command-line flag that overrides it. All outputs are deterministic for a
// fixed (config, seed, inputs) triple.
//
// Exit codes: 0 success (detect: no anomaly), 1 detect saw an anomaly,
// 2 parse/validation, 3 filter calibration failed, 4 training failed,
// 5 dimension mismatch.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shmedge/deploy.hpp"
#include "shmedge/detector.hpp"
#include "shmedge/energy_filter.hpp"
#include "shmedge/errors.hpp"
#include "shmedge/model_io.hpp"
#include "shmedge/pca.hpp"
#include "shmedge/pipeline.hpp"
#include "shmedge/signal.hpp"
#include "shmedge/synth.hpp"
#include "shmedge/trace_io.hpp"

using nlohmann::json;
using namespace shmedge;

namespace {

struct TrainSection {
    double qos_rsnr_db = 16.0;
    double val_fraction = 0.3;
    int filter_components = 0;  // 0: round(M_raw / 16)
    int epochs = 80;
    double learning_rate = 1e-3;
    int batch_size = 32;
    int block_size = 200;
    int passes = 4;
};

struct CostSection {
    std::string scenario = "all";
    int hours = 1;
    int retrain_hours = 0;
    std::uint32_t payload_bytes = 1300;
    std::uint32_t verdict_bytes = 3;
    std::uint32_t bytes_per_s_raw = 200;
    std::string radio_table;  // CSV of payload_bytes,energy_j anchors
    double session_j = 0.70;
    double sleep_j_per_h = 0.390;
};

struct SimSection {
    int nodes = 1;
    int hours = 1;
    std::string scenario = "edge";
    std::string policy = "never";
    int retrain_period_h = 24;
    double drift_fraction = 0.5;
    int drift_lookback_h = 6;
    int retrain_cooldown_h = 24;
};

struct RunConfig {
    double input_dim_s = 5.0;
    int output_dim_min = 60;
    int components_k = 0;  // 0: derived, see resolve_components
    double cf = 0.0;       // 0: unset; else k = round(M_raw / cf)
    std::string domain = "fft";
    std::string detector = "pca";
    std::string traces;
    std::string model = "model.shmm";
    std::string report;
    std::uint64_t seed = 1;
    BridgeSimConfig synth;
    TrainSection train;
    CostSection cost;
    SimSection sim;
};

void require_keys(const json& j, const std::string& section,
                  std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end()) {
            throw ParseError("unknown config key '" + (section.empty() ? key : section + "." + key) +
                             "'");
        }
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

RunConfig load_config(const std::string& path) {
    RunConfig rc;
    if (path.empty()) return rc;
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    json j = json::parse(in);

    require_keys(j, "", {"input_dim_s", "output_dim_min", "components_k", "cf", "domain",
                         "detector", "traces", "model", "report", "seed", "synth", "train",
                         "cost", "sim"});
    maybe(j, "input_dim_s", rc.input_dim_s);
    maybe(j, "output_dim_min", rc.output_dim_min);
    maybe(j, "components_k", rc.components_k);
    maybe(j, "cf", rc.cf);
    maybe(j, "domain", rc.domain);
    maybe(j, "detector", rc.detector);
    maybe(j, "traces", rc.traces);
    maybe(j, "model", rc.model);
    maybe(j, "report", rc.report);
    maybe(j, "seed", rc.seed);

    if (auto it = j.find("synth"); it != j.end()) {
        const json& s = *it;
        require_keys(s, "synth",
                     {"sample_rate_hz", "natural_freq_hz", "anomaly_freq_hz", "damping_ratio",
                      "vehicle_rate_per_min", "excitation_amplitude_g", "noise_sigma_g",
                      "force_initial_event"});
        maybe(s, "sample_rate_hz", rc.synth.sample_rate_hz);
        maybe(s, "natural_freq_hz", rc.synth.natural_freq_hz);
        maybe(s, "anomaly_freq_hz", rc.synth.anomaly_freq_hz);
        maybe(s, "damping_ratio", rc.synth.damping_ratio);
        maybe(s, "vehicle_rate_per_min", rc.synth.vehicle_rate_per_min);
        maybe(s, "excitation_amplitude_g", rc.synth.excitation_amplitude_g);
        maybe(s, "noise_sigma_g", rc.synth.noise_sigma_g);
        maybe(s, "force_initial_event", rc.synth.force_initial_event);
    }
    if (auto it = j.find("train"); it != j.end()) {
        const json& s = *it;
        require_keys(s, "train",
                     {"qos_rsnr_db", "val_fraction", "filter_components", "epochs",
                      "learning_rate", "batch_size", "block_size", "passes"});
        maybe(s, "qos_rsnr_db", rc.train.qos_rsnr_db);
        maybe(s, "val_fraction", rc.train.val_fraction);
        maybe(s, "filter_components", rc.train.filter_components);
        maybe(s, "epochs", rc.train.epochs);
        maybe(s, "learning_rate", rc.train.learning_rate);
        maybe(s, "batch_size", rc.train.batch_size);
        maybe(s, "block_size", rc.train.block_size);
        maybe(s, "passes", rc.train.passes);
    }
    if (auto it = j.find("cost"); it != j.end()) {
        const json& s = *it;
        require_keys(s, "cost",
                     {"scenario", "hours", "retrain_hours", "payload_bytes", "verdict_bytes",
                      "bytes_per_s_raw", "radio_table", "session_j", "sleep_j_per_h"});
        maybe(s, "scenario", rc.cost.scenario);
        maybe(s, "hours", rc.cost.hours);
        maybe(s, "retrain_hours", rc.cost.retrain_hours);
        maybe(s, "payload_bytes", rc.cost.payload_bytes);
        maybe(s, "verdict_bytes", rc.cost.verdict_bytes);
        maybe(s, "bytes_per_s_raw", rc.cost.bytes_per_s_raw);
        maybe(s, "radio_table", rc.cost.radio_table);
        maybe(s, "session_j", rc.cost.session_j);
        maybe(s, "sleep_j_per_h", rc.cost.sleep_j_per_h);
    }
    if (auto it = j.find("sim"); it != j.end()) {
        const json& s = *it;
        require_keys(s, "sim",
                     {"nodes", "hours", "scenario", "policy", "retrain_period_h",
                      "drift_fraction", "drift_lookback_h", "retrain_cooldown_h"});
        maybe(s, "nodes", rc.sim.nodes);
        maybe(s, "hours", rc.sim.hours);
        maybe(s, "scenario", rc.sim.scenario);
        maybe(s, "policy", rc.sim.policy);
        maybe(s, "retrain_period_h", rc.sim.retrain_period_h);
        maybe(s, "drift_fraction", rc.sim.drift_fraction);
        maybe(s, "drift_lookback_h", rc.sim.drift_lookback_h);
        maybe(s, "retrain_cooldown_h", rc.sim.retrain_cooldown_h);
    }
    return rc;
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : "NA"; }

TraceFormat format_for(const std::string& path, const std::string& override_fmt) {
    if (!override_fmt.empty()) return trace_format_from_string(override_fmt);
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
        return TraceFormat::csv;
    }
    return TraceFormat::int16_binary;
}

AccelTrace load_trace(const std::string& path, const std::string& override_fmt,
                      double sample_rate_hz = 0.0) {
    if (path.empty()) throw ParseError("no trace path given");
    return ingest_trace_file(path, format_for(path, override_fmt), sample_rate_hz);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open output file '" + path + "'");
    return out;
}

// Retained components for a window of m_raw samples whose model input has
// m_model entries after the domain transform. Explicit k wins; an explicit
// compression factor divides the raw dimension; otherwise the time domain
// keeps the classic 16 components and spectral domains keep a factor-16
// reduction of their own dimension.
int resolve_components(const RunConfig& rc, std::size_t m_raw, std::size_t m_model) {
    long long k;
    if (rc.components_k > 0) {
        k = rc.components_k;
    } else if (rc.cf > 0.0) {
        k = std::llround(static_cast<double>(m_raw) / rc.cf);
    } else if (spectral_domain_from_string(rc.domain) == SpectralDomain::time) {
        k = 16;
    } else {
        k = std::llround(static_cast<double>(m_model) / 16.0);
    }
    if (k < 1 || k > static_cast<long long>(m_model)) {
        throw ParameterError("retained components " + std::to_string(k) +
                             " outside [1, " + std::to_string(m_model) + "]");
    }
    return static_cast<int>(k);
}

int filter_components(const RunConfig& rc, std::size_t m_raw) {
    if (rc.train.filter_components > 0) return rc.train.filter_components;
    return static_cast<int>(std::llround(static_cast<double>(m_raw) / 16.0));
}

RadioModel build_radio(const CostSection& cs) {
    if (cs.radio_table.empty()) {
        RadioModel radio = RadioModel::nbiot_default();
        radio.session_energy_j = cs.session_j;
        radio.e_sleep_per_hour_j = cs.sleep_j_per_h;
        return radio;
    }
    std::ifstream in(cs.radio_table);
    if (!in) throw ParseError("cannot open radio table '" + cs.radio_table + "'");
    std::vector<RadioModel::Anchor> anchors;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::uint32_t payload = 0;
        double energy = 0.0;
        if (std::sscanf(line.c_str(), "%u,%lf", &payload, &energy) != 2) {
            throw ParseError("bad radio table row '" + line + "'", lineno);
        }
        anchors.push_back({payload, energy});
    }
    const std::uint32_t max_payload = anchors.empty() ? 0 : anchors.back().payload_bytes;
    return RadioModel::from_table(anchors, cs.session_j, max_payload, cs.sleep_j_per_h);
}

CostModelConfig build_cost_config(const CostSection& cs) {
    CostModelConfig cfg;
    cfg.payload_bytes = cs.payload_bytes;
    cfg.verdict_bytes = cs.verdict_bytes;
    cfg.bytes_per_s_raw = cs.bytes_per_s_raw;
    return cfg;
}

void write_ledger_header(std::ostream& out, bool with_node) {
    if (with_node) out << "node,";
    out << "scenario,hours,traffic_bytes,traffic_overhead_bytes,packets,"
           "radio_j,compute_j,gathering_j,storage_j,total_j\n";
}

void write_ledger_row(std::ostream& out, const CostLedger& l, int node) {
    if (node >= 0) out << node << ",";
    out << to_string(l.scenario) << "," << l.hours << "," << l.traffic_bytes << ","
        << l.traffic_overhead_bytes << "," << l.packets << "," << fmt(l.radio_energy_j) << ","
        << fmt(l.compute_energy_j) << "," << fmt(l.gathering_energy_j) << ","
        << fmt(l.storage_energy_j) << "," << fmt(l.total_energy_j()) << "\n";
}

// ---------------------------------------------------------------- gen

struct GenOpts {
    std::string out;
    std::string format;
    double duration_h = 1.0;
    std::string state = "normal";
    double lsb_to_g = 1.0e-4;
};

int cmd_gen(RunConfig& rc, GenOpts& go) {
    if (go.out.empty()) throw ParseError("gen requires --out");
    rc.synth.seed = rc.seed;
    rc.synth.validate();
    BridgeState state;
    if (go.state == "normal") {
        state = BridgeState::normal;
    } else if (go.state == "anomalous") {
        state = BridgeState::anomalous;
    } else {
        throw ParameterError("unknown bridge state '" + go.state + "'");
    }
    AccelTrace trace = generate_trace(rc.synth, go.duration_h * 3600.0, state);
    write_trace_file(go.out, trace, format_for(go.out, go.format), go.lsb_to_g);
    std::cout << "wrote " << go.out << ": " << trace.samples.size() << " samples at "
              << fmt(trace.sample_rate_hz) << " Hz, " << fmt(trace.duration_s()) << " s, state="
              << go.state << "\n";
    return 0;
}

// ---------------------------------------------------------------- train

struct TrainedPipeline {
    ModelBundle bundle;
    std::size_t m_raw = 0;
    std::size_t m_model = 0;
    int k = 0;
};

// Shared by train and sweep: filter calibration on a temporal split, model
// fit on the kept earlier part, threshold from the full-chain scores of the
// held-out tail. Training never sees labels.
TrainedPipeline train_pipeline(const RunConfig& rc, const std::vector<Window>& windows) {
    if (windows.size() < 4) {
        throw InsufficientDataError("only " + std::to_string(windows.size()) +
                                    " windows, cannot split for validation");
    }
    const auto n_val = static_cast<std::size_t>(
        std::llround(static_cast<double>(windows.size()) * rc.train.val_fraction));
    if (n_val == 0 || n_val >= windows.size()) {
        throw ParameterError("val_fraction " + fmt(rc.train.val_fraction) +
                             " leaves an empty split");
    }
    std::vector<Window> fit_part(windows.begin(), windows.end() - n_val);
    std::vector<Window> val_part(windows.end() - n_val, windows.end());

    TrainedPipeline tp;
    tp.m_raw = windows.front().values.size();

    const SpectralDomain domain = spectral_domain_from_string(rc.domain);
    tp.bundle.domain = domain;
    tp.bundle.filter = calibrate_energy_threshold(fit_part, val_part, rc.train.qos_rsnr_db,
                                                  filter_components(rc, tp.m_raw));

    auto kept_fit = apply_energy_filter(fit_part, tp.bundle.filter).kept;
    auto transformed = transform_windows(domain, kept_fit);
    if (transformed.empty()) throw InsufficientDataError("energy filter kept no training windows");
    tp.m_model = transformed.front().values.size();
    tp.k = resolve_components(rc, tp.m_raw, tp.m_model);

    if (rc.detector == "pca") {
        tp.bundle.model = fit_pca_batch(transformed, tp.k);
    } else if (rc.detector == "hpca") {
        tp.bundle.model = fit_pca_streaming(transformed, tp.k,
                                            static_cast<std::size_t>(rc.train.block_size),
                                            rc.train.passes, rc.seed);
    } else if (rc.detector == "ae") {
        AeTrainConfig acfg;
        acfg.epochs = rc.train.epochs;
        acfg.learning_rate = rc.train.learning_rate;
        acfg.batch_size = rc.train.batch_size;
        acfg.seed = rc.seed;
        tp.bundle.model = fit_autoencoder(transformed, tp.k, acfg);
    } else {
        throw ParameterError("unknown detector kind '" + rc.detector + "'");
    }

    auto val_scores = score_pipeline(tp.bundle, val_part);
    tp.bundle.detector = calibrate_threshold(val_scores, rc.input_dim_s, rc.output_dim_min);
    return tp;
}

int cmd_train(RunConfig& rc, const std::string& fmt_override) {
    AccelTrace trace = load_trace(rc.traces, fmt_override);
    auto windows = windowize(trace, rc.input_dim_s);
    TrainedPipeline tp = train_pipeline(rc, windows);
    save_model_file(rc.model, tp.bundle);
    std::cout << "trained " << rc.detector << " detector: domain=" << rc.domain
              << " m=" << tp.m_model << " k=" << tp.k << "\n"
              << "retained_fraction=" << fmt(tp.bundle.filter.retained_fraction)
              << " energy_threshold=" << fmt(tp.bundle.filter.threshold) << "\n"
              << "mu=" << fmt(tp.bundle.detector.mu) << " sigma=" << fmt(tp.bundle.detector.sigma)
              << " threshold=" << fmt(tp.bundle.detector.mse_threshold) << "\n"
              << "model=" << rc.model << "\n";
    return 0;
}

// ---------------------------------------------------------------- detect

struct DetectOpts {
    std::string labels;
    std::string roc;
    int output_dim_min = 0;  // 0: the model's stored horizon
};

std::vector<bool> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open labels file '" + path + "'");
    std::vector<bool> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (line == "0") {
            labels.push_back(false);
        } else if (line == "1") {
            labels.push_back(true);
        } else {
            throw ParseError("labels must be 0 or 1, got '" + line + "'", lineno);
        }
    }
    return labels;
}

int cmd_detect(RunConfig& rc, DetectOpts& dopt, const std::string& fmt_override) {
    ModelBundle bundle = load_model_file(rc.model);
    AccelTrace trace = load_trace(rc.traces, fmt_override);
    auto windows = windowize(trace, bundle.detector.input_dim_s);
    auto scores = score_pipeline(bundle, windows);
    const int horizon = dopt.output_dim_min > 0 ? dopt.output_dim_min
                                                : bundle.detector.output_dim_minutes;
    auto intervals = average_scores(scores, horizon);
    auto verdicts = classify(intervals, bundle.detector);

    bool any_anomaly = false;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto& iv = intervals[i];
        const std::string mean = iv.window_count > 0 ? fmt(iv.mean_mse) : "NA";
        std::cout << fmt(iv.start_s) << "\t" << mean << "\t" << to_string(verdicts[i]) << "\n";
        any_anomaly = any_anomaly || verdicts[i] == Verdict::anomaly;
    }

    if (!rc.report.empty()) {
        auto out = open_out(rc.report);
        out << "start_s,mean_mse,window_count,verdict\n";
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            const auto& iv = intervals[i];
            out << fmt(iv.start_s) << "," << (iv.window_count > 0 ? fmt(iv.mean_mse) : "NA")
                << "," << iv.window_count << "," << to_string(verdicts[i]) << "\n";
        }
    }

    if (!dopt.labels.empty()) {
        auto labels = load_labels(dopt.labels);
        auto report = evaluate(intervals, verdicts, labels);
        std::cout << format_report(report);
        if (!dopt.roc.empty()) {
            auto out = open_out(dopt.roc);
            out << "fpr,tpr\n";
            for (const auto& [fpr, tpr] : report.roc_points) {
                out << fmt(fpr) << "," << fmt(tpr) << "\n";
            }
        }
    }
    return any_anomaly ? 1 : 0;
}

// ---------------------------------------------------------------- sweep

struct SweepOpts {
    std::string train_trace;
    std::string normal_trace;
    std::string anomaly_trace;
    std::string inputs = "1,2,5,10";
    std::string outputs = "15,30,60,120,240";
};

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        double v = std::stod(item, &pos);
        if (pos != item.size()) throw ParseError("bad list entry '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ParseError("empty grid list '" + csv + "'");
    return out;
}

int cmd_sweep(RunConfig& rc, SweepOpts& sopt, const std::string& fmt_override) {
    AccelTrace train_trace = load_trace(sopt.train_trace, fmt_override);
    AccelTrace normal_trace = load_trace(sopt.normal_trace, fmt_override);
    AccelTrace anomaly_trace = load_trace(sopt.anomaly_trace, fmt_override);
    auto inputs = parse_list(sopt.inputs);
    auto outputs = parse_list(sopt.outputs);

    std::ostringstream csv;
    csv << "input_dim_s,output_dim_min,k,accuracy,sensitivity,specificity,auc,"
           "flash_bytes,ram_bytes,fits,energy_j,latency_s\n";

    for (double input_s : inputs) {
        RunConfig point = rc;
        point.input_dim_s = input_s;
        TrainedPipeline tp = train_pipeline(point, windowize(train_trace, input_s));
        auto normal_scores = score_pipeline(tp.bundle, windowize(normal_trace, input_s));
        auto anomaly_scores = score_pipeline(tp.bundle, windowize(anomaly_trace, input_s));

        // deployment estimate at the fleet compression ratio, per Table-style
        // raw-window dimensioning; detector k is reported separately
        const int m_raw = static_cast<int>(tp.m_raw);
        const int k_dep = static_cast<int>(std::llround(m_raw / 16.0));
        auto footprint = estimate_footprint(m_raw, k_dep, 4, McuBudget{});
        auto inference = estimate_inference_cost(m_raw, k_dep, McuBudget{});

        for (double output_min : outputs) {
            const int horizon = static_cast<int>(std::llround(output_min));
            auto normal_iv = average_scores(normal_scores, horizon);
            auto anomaly_iv = average_scores(anomaly_scores, horizon);
            std::vector<IntervalScore> intervals = normal_iv;
            intervals.insert(intervals.end(), anomaly_iv.begin(), anomaly_iv.end());
            std::vector<bool> labels(normal_iv.size(), false);
            labels.insert(labels.end(), anomaly_iv.size(), true);
            auto verdicts = classify(intervals, tp.bundle.detector);
            auto report = evaluate(intervals, verdicts, labels);

            csv << fmt(input_s) << "," << horizon << "," << tp.k << ","
                << fmt_opt(report.accuracy) << "," << fmt_opt(report.sensitivity) << ","
                << fmt_opt(report.specificity) << "," << fmt_opt(report.auc) << ","
                << fmt(footprint.flash_bytes) << "," << fmt(footprint.ram_bytes) << ","
                << (footprint.fits ? "true" : "false") << "," << fmt(inference.energy_j) << ","
                << fmt(inference.latency_s) << "\n";
        }
    }

    if (rc.report.empty()) {
        std::cout << csv.str();
    } else {
        open_out(rc.report) << csv.str();
        std::cout << "wrote " << rc.report << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- inject

struct InjectOpts {
    std::string normal_trace;
    std::string anomaly_trace;
    std::string out;
    double level = 1.0;
    double lsb_to_g = 1.0e-4;
};

int cmd_inject(RunConfig& rc, InjectOpts& iopt, const std::string& fmt_override) {
    AccelTrace normal_trace = load_trace(iopt.normal_trace, fmt_override);
    AccelTrace anomaly_trace = load_trace(iopt.anomaly_trace, fmt_override);
    auto normal_w = windowize(normal_trace, rc.input_dim_s);
    auto anomaly_w = windowize(anomaly_trace, rc.input_dim_s);
    auto injected = inject_severity(normal_w, anomaly_w, SeverityLevel{iopt.level});

    AccelTrace out_trace;
    out_trace.sample_rate_hz = anomaly_trace.sample_rate_hz;
    out_trace.start_time_s = anomaly_trace.start_time_s;
    out_trace.axis_label = anomaly_trace.axis_label;
    for (const auto& w : injected) {
        out_trace.samples.insert(out_trace.samples.end(), w.values.begin(), w.values.end());
    }
    if (iopt.out.empty()) throw ParseError("inject requires --out");
    write_trace_file(iopt.out, out_trace, format_for(iopt.out, fmt_override), iopt.lsb_to_g);
    std::cout << "wrote " << iopt.out << ": " << injected.size() << " windows at severity "
              << fmt(iopt.level) << "\n";
    return 0;
}

// ---------------------------------------------------------------- cost

struct CostOpts {
    bool mcu = false;
    std::string inputs = "1,2,5,10";
    double sample_rate_hz = 100.0;
};

int cmd_cost(RunConfig& rc, CostOpts& copt) {
    const RadioModel radio = build_radio(rc.cost);
    const CostModelConfig cost_cfg = build_cost_config(rc.cost);

    std::vector<Scenario> scenarios;
    if (rc.cost.scenario == "all") {
        scenarios = {Scenario::cloud, Scenario::hybrid, Scenario::edge};
    } else {
        scenarios = {scenario_from_string(rc.cost.scenario)};
    }

    std::ostringstream csv;
    write_ledger_header(csv, false);
    for (Scenario s : scenarios) {
        write_ledger_row(csv, scenario_ledger(s, rc.cost.hours, radio, cost_cfg,
                                              rc.cost.retrain_hours),
                         -1);
    }

    if (copt.mcu) {
        csv << "input_dim_s,m,k,flash_bytes,ram_bytes,fits,macs,energy_j,latency_s\n";
        for (double input_s : parse_list(copt.inputs)) {
            const int m = static_cast<int>(std::llround(input_s * copt.sample_rate_hz));
            const int k = static_cast<int>(std::llround(m / 16.0));
            auto fp = estimate_footprint(m, k, 4, McuBudget{});
            auto ic = estimate_inference_cost(m, k, McuBudget{});
            csv << fmt(input_s) << "," << m << "," << k << "," << fmt(fp.flash_bytes) << ","
                << fmt(fp.ram_bytes) << "," << (fp.fits ? "true" : "false") << "," << ic.macs
                << "," << fmt(ic.energy_j) << "," << fmt(ic.latency_s) << "\n";
        }
    }

    if (rc.report.empty()) {
        std::cout << csv.str();
    } else {
        open_out(rc.report) << csv.str();
        std::cout << "wrote " << rc.report << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- simulate

struct SimOpts {
    std::string traces;  // comma-separated, one per node; single path replicates
    std::string alarms;
    std::string retrains;
};

int cmd_simulate(RunConfig& rc, SimOpts& sopt, const std::string& fmt_override) {
    ModelBundle bundle = load_model_file(rc.model);

    SimConfig sim;
    sim.node_count = rc.sim.nodes;
    sim.hours = rc.sim.hours;
    sim.scenario = scenario_from_string(rc.sim.scenario);
    sim.retrain_policy = retrain_policy_from_string(rc.sim.policy);
    sim.retrain_period_h = rc.sim.retrain_period_h;
    sim.drift_fraction = rc.sim.drift_fraction;
    sim.drift_lookback_h = rc.sim.drift_lookback_h;
    sim.retrain_cooldown_h = rc.sim.retrain_cooldown_h;
    sim.seed = rc.seed;

    std::vector<std::string> paths;
    {
        std::stringstream ss(sopt.traces.empty() ? rc.traces : sopt.traces);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) paths.push_back(item);
        }
    }
    if (paths.empty()) throw ParseError("simulate requires --traces");
    std::vector<AccelTrace> traces;
    for (const auto& p : paths) traces.push_back(load_trace(p, fmt_override));
    while (static_cast<int>(traces.size()) < sim.node_count && paths.size() == 1) {
        traces.push_back(traces.front());  // one shared trace replicated per node
    }

    const RadioModel radio = build_radio(rc.cost);
    const CostModelConfig cost_cfg = build_cost_config(rc.cost);
    FleetResult result = simulate_fleet(sim, bundle, bundle.detector.input_dim_s,
                                        bundle.detector.output_dim_minutes, traces, radio,
                                        cost_cfg);

    std::ostringstream ledgers;
    write_ledger_header(ledgers, true);
    for (std::size_t node = 0; node < result.ledgers.size(); ++node) {
        write_ledger_row(ledgers, result.ledgers[node], static_cast<int>(node));
    }
    std::ostringstream alarms;
    alarms << "node,interval_start_s,verdict\n";
    for (const auto& a : result.alarms) {
        alarms << a.node << "," << fmt(a.interval_start_s) << "," << to_string(a.verdict) << "\n";
    }
    std::ostringstream retrains;
    retrains << "node,hour\n";
    for (const auto& r : result.retrains) retrains << r.node << "," << r.hour << "\n";

    if (rc.report.empty()) {
        std::cout << ledgers.str() << alarms.str() << retrains.str();
    } else {
        open_out(rc.report) << ledgers.str();
        if (!sopt.alarms.empty()) open_out(sopt.alarms) << alarms.str();
        if (!sopt.retrains.empty()) open_out(sopt.retrains) << retrains.str();
        double total = 0.0;
        for (const auto& l : result.ledgers) total += l.total_energy_j();
        std::cout << "simulated " << result.ledgers.size() << " nodes over " << sim.hours
                  << " h: total_energy_j=" << fmt(total) << " alarms=" << result.alarms.size()
                  << " retrains=" << result.retrains.size() << "\n";
    }
    return 0;
}

std::string find_config_path(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return "";
}

}  // namespace

int main(int argc, char** argv) {
    int exit_code = 0;
    try {
        RunConfig rc = load_config(find_config_path(argc, argv));

        CLI::App app{"vibration anomaly-detection pipeline"};
        app.require_subcommand(1);
        std::string config_path;  // consumed above; declared so CLI11 accepts it
        app.add_option("--config", config_path, "JSON config file; flags override its keys");
        app.add_option("--seed", rc.seed, "RNG seed for gen and training");
        std::string fmt_override;

        auto add_pipeline_flags = [&](CLI::App* cmd) {
            cmd->add_option("--input-dim", rc.input_dim_s, "window length in seconds");
            cmd->add_option("--output-dim", rc.output_dim_min, "verdict horizon in minutes");
            cmd->add_option("--components", rc.components_k, "retained components");
            cmd->add_option("--cf", rc.cf, "compression factor; k = round(raw samples / cf)");
            cmd->add_option("--domain", rc.domain, "model input domain: time, fft, dwt");
            cmd->add_option("--format", fmt_override, "trace format: csv, i16");
        };

        GenOpts gen_opts;
        auto* gen = app.add_subcommand("gen", "generate a synthetic bridge trace");
        gen->add_option("--out", gen_opts.out, "output trace path")->required();
        gen->add_option("--duration-h", gen_opts.duration_h, "trace length in hours");
        gen->add_option("--state", gen_opts.state, "normal or anomalous");
        gen->add_option("--format", fmt_override, "trace format: csv, i16");
        gen->add_option("--lsb", gen_opts.lsb_to_g, "binary quantization step in g");
        gen->add_option("--sample-rate", rc.synth.sample_rate_hz, "sample rate in Hz");
        gen->add_option("--natural-freq", rc.synth.natural_freq_hz, "healthy modal frequency");
        gen->add_option("--anomaly-freq", rc.synth.anomaly_freq_hz, "degraded modal frequency");
        gen->add_option("--damping", rc.synth.damping_ratio, "modal damping ratio");
        gen->add_option("--rate", rc.synth.vehicle_rate_per_min, "vehicle passages per minute");
        gen->add_option("--amplitude", rc.synth.excitation_amplitude_g, "ring amplitude in g");
        gen->add_option("--noise", rc.synth.noise_sigma_g, "sensor noise sigma in g");
        gen->add_flag("--force-event", rc.synth.force_initial_event,
                      "deterministic passage at t=0");
        gen->callback([&] { exit_code = cmd_gen(rc, gen_opts); });

        auto* train = app.add_subcommand("train", "fit filter, reconstructor, and threshold");
        add_pipeline_flags(train);
        train->add_option("--traces", rc.traces, "normal-only training trace");
        train->add_option("--model", rc.model, "output model path");
        train->add_option("--detector", rc.detector, "reconstructor kind: pca, hpca, ae");
        train->add_option("--qos", rc.train.qos_rsnr_db, "filter RSNR bound in dB");
        train->add_option("--val-fraction", rc.train.val_fraction, "held-out tail fraction");
        train->add_option("--filter-components", rc.train.filter_components,
                          "filter calibration rank; 0 = raw samples / 16");
        train->add_option("--epochs", rc.train.epochs, "autoencoder epochs");
        train->add_option("--lr", rc.train.learning_rate, "autoencoder learning rate");
        train->add_option("--batch", rc.train.batch_size, "autoencoder batch size");
        train->add_option("--block", rc.train.block_size, "streaming update block size");
        train->add_option("--passes", rc.train.passes, "streaming passes over the data");
        train->callback([&] { exit_code = cmd_train(rc, fmt_override); });

        DetectOpts detect_opts;
        auto* detect = app.add_subcommand("detect", "score a trace against a trained model");
        detect->add_option("--traces", rc.traces, "trace to score");
        detect->add_option("--model", rc.model, "trained model path");
        detect->add_option("--report", rc.report, "interval CSV output path");
        detect->add_option("--labels", detect_opts.labels,
                           "per-interval 0/1 labels; enables evaluation");
        detect->add_option("--roc", detect_opts.roc, "ROC CSV output path (with --labels)");
        detect->add_option("--output-dim", detect_opts.output_dim_min,
                           "override verdict horizon in minutes");
        detect->add_option("--format", fmt_override, "trace format: csv, i16");
        detect->callback([&] { exit_code = cmd_detect(rc, detect_opts, fmt_override); });

        SweepOpts sweep_opts;
        auto* sweep = app.add_subcommand("sweep", "factorial input/output dimension study");
        add_pipeline_flags(sweep);
        sweep->add_option("--train-trace", sweep_opts.train_trace, "normal training trace")
            ->required();
        sweep->add_option("--normal-trace", sweep_opts.normal_trace, "normal test trace")
            ->required();
        sweep->add_option("--anomaly-trace", sweep_opts.anomaly_trace, "anomalous test trace")
            ->required();
        sweep->add_option("--inputs", sweep_opts.inputs, "window lengths in seconds");
        sweep->add_option("--outputs", sweep_opts.outputs, "verdict horizons in minutes");
        sweep->add_option("--report", rc.report, "CSV output path");
        sweep->add_option("--detector", rc.detector, "reconstructor kind: pca, hpca, ae");
        sweep->callback([&] { exit_code = cmd_sweep(rc, sweep_opts, fmt_override); });

        InjectOpts inject_opts;
        auto* inject = app.add_subcommand("inject", "rewrite anomaly severity via peak shifting");
        inject->add_option("--normal", inject_opts.normal_trace, "normal reference trace")
            ->required();
        inject->add_option("--anomaly", inject_opts.anomaly_trace, "anomalous trace")->required();
        inject->add_option("--out", inject_opts.out, "output trace path")->required();
        inject->add_option("--level", inject_opts.level, "severity multiplier in [0, 2]");
        inject->add_option("--input-dim", rc.input_dim_s, "window length in seconds");
        inject->add_option("--format", fmt_override, "trace format: csv, i16");
        inject->add_option("--lsb", inject_opts.lsb_to_g, "binary quantization step in g");
        inject->callback([&] { exit_code = cmd_inject(rc, inject_opts, fmt_override); });

        CostOpts cost_opts;
        auto* cost = app.add_subcommand("cost", "closed-form deployment cost ledgers");
        cost->add_option("--scenario", rc.cost.scenario, "cloud, hybrid, edge, or all");
        cost->add_option("--hours", rc.cost.hours, "accounting period");
        cost->add_option("--retrain-hours", rc.cost.retrain_hours, "hours spent retraining");
        cost->add_option("--payload", rc.cost.payload_bytes, "radio packet payload bytes");
        cost->add_option("--verdict-bytes", rc.cost.verdict_bytes, "bytes per verdict");
        cost->add_option("--bytes-per-s", rc.cost.bytes_per_s_raw, "raw stream byte rate");
        cost->add_option("--radio-table", rc.cost.radio_table,
                         "CSV of payload_bytes,energy_j anchors");
        cost->add_option("--session-j", rc.cost.session_j, "radio session energy");
        cost->add_option("--sleep-j", rc.cost.sleep_j_per_h, "sleep energy per hour");
        cost->add_option("--report", rc.report, "CSV output path");
        cost->add_flag("--mcu", cost_opts.mcu, "append footprint and latency table");
        cost->add_option("--inputs", cost_opts.inputs, "window lengths for --mcu");
        cost->add_option("--sample-rate", cost_opts.sample_rate_hz, "sample rate for --mcu");
        cost->callback([&] { exit_code = cmd_cost(rc, cost_opts); });

        SimOpts sim_opts;
        auto* sim = app.add_subcommand("simulate", "deterministic multi-node fleet replay");
        sim->add_option("--model", rc.model, "trained model path");
        sim->add_option("--traces", sim_opts.traces,
                        "comma-separated node traces; a single path is shared");
        sim->add_option("--nodes", rc.sim.nodes, "fleet size");
        sim->add_option("--hours", rc.sim.hours, "simulated hours");
        sim->add_option("--scenario", rc.sim.scenario, "cloud, hybrid, or edge");
        sim->add_option("--policy", rc.sim.policy, "never, scheduled, or drift-triggered");
        sim->add_option("--period", rc.sim.retrain_period_h, "scheduled retrain period");
        sim->add_option("--drift-fraction", rc.sim.drift_fraction,
                        "anomalous share that trips a retrain");
        sim->add_option("--lookback", rc.sim.drift_lookback_h, "drift lookback hours");
        sim->add_option("--cooldown", rc.sim.retrain_cooldown_h, "retrain cooldown hours");
        sim->add_option("--report", rc.report, "ledger CSV output path");
        sim->add_option("--alarms", sim_opts.alarms, "alarm log CSV output path");
        sim->add_option("--retrains", sim_opts.retrains, "retrain log CSV output path");
        sim->add_option("--payload", rc.cost.payload_bytes, "radio packet payload bytes");
        sim->add_option("--verdict-bytes", rc.cost.verdict_bytes, "bytes per verdict");
        sim->add_option("--radio-table", rc.cost.radio_table,
                        "CSV of payload_bytes,energy_j anchors");
        sim->add_option("--format", fmt_override, "trace format: csv, i16");
        sim->callback([&] { exit_code = cmd_simulate(rc, sim_opts, fmt_override); });

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }
        return exit_code;
    } catch (const CalibrationError& e) {
        std::cerr << "calibration failed: " << e.what() << "\n";
        return 3;
    } catch (const TrainingError& e) {
        std::cerr << "training failed: " << e.what() << "\n";
        return 4;
    } catch (const DimensionError& e) {
        std::cerr << "dimension mismatch: " << e.what() << "\n";
        return 5;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
