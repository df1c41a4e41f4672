// SPDX-FileCopyrightText: Copyright (c) 2026 The vstream Authors
// SPDX-License-Identifier: Apache-2.0

// Experiment specs, multi-trial orchestration, metrics tables and the
// bundled invariant suite.

#pragma once

#include "vstream/config.hpp"
#include "vstream/invariants.hpp"
#include "vstream/num.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vstream
{
    struct SweepSpec
    {
        std::string axis; ///< "" (single point), "ell_tot" or "p"
        std::vector<double> values;
    };

    struct ExperimentSpec
    {
        std::string name = "experiment";
        /// Clients, p, ell_tot, horizon, seed and trials. When `allocate_ell`
        /// is set the ell of each client is derived from beta at every sweep
        /// point, otherwise the ell values are taken as given.
        NetworkConfig base;
        bool allocate_ell = false;
        std::optional<PenaltySpec> penalty; ///< when set, beta is derived from zeta
        std::vector<std::string> policies{"wld"};
        SweepSpec sweep;
        std::vector<std::int64_t> checkpoints; ///< empty means {horizon}
        unsigned threads = 0;

        /// Throws ConfigError describing the first problem found.
        void validate() const;
        [[nodiscard]] std::size_t points() const noexcept { return sweep.axis.empty() ? 1 : sweep.values.size(); }
        [[nodiscard]] std::vector<std::int64_t> effective_checkpoints() const;
        /// Network at sweep point k with ell allocated and beta resolved.
        [[nodiscard]] NetworkConfig config_at(std::size_t point) const;
    };

    /// Parses the JSON form:
    ///   {"name": ..., "clients": [{"period": 10, "ell": 8 | "beta": 1, "zeta": 1}],
    ///    "p": 0.5 | "1/2", "ell_tot": 40, "horizon": 300000, "trials": 50, "seed": 1,
    ///    "policies": ["wld"], "sweep": {"axis": "ell_tot", "values": [...]},
    ///    "checkpoints": [...], "penalty": {"kind": "maxmin" | "monomial", "kappa": 2}}
    /// Every client gives ell, or none does (allocation from beta).
    [[nodiscard]] ExperimentSpec parse_spec(const std::string &text);
    [[nodiscard]] ExperimentSpec load_spec(const std::filesystem::path &path);
    [[nodiscard]] std::string spec_to_json(const ExperimentSpec &spec);

    [[nodiscard]] std::vector<std::string> preset_names();
    /// Throws ConfigError for an unknown name.
    [[nodiscard]] ExperimentSpec preset(const std::string &name);

    /// At most 10 trials and 10^5 slots; checkpoints are scaled with the horizon.
    void apply_fast_mode(ExperimentSpec &spec);

    /// One metrics line: either one trial or the mean over trials.
    struct MetricsRow
    {
        std::string experiment;
        std::string policy;
        std::size_t point = 0;
        double p = 0.0;
        std::int64_t ell_tot = 0;
        std::string regime;
        bool aggregate = false;
        int trial = -1; ///< -1 on aggregate rows
        std::int64_t slot = 0;
        std::vector<double> drops;
        std::vector<double> dummies;
        std::vector<double> delivered;
        std::vector<double> played;
        std::vector<double> rates; ///< drops / slot
        double total_rate = 0.0;
        double total_rate_se = 0.0;
        /// total drops since the previous checkpoint divided by the slots in
        /// between; equals total_rate at the first checkpoint
        double window_rate = 0.0;
        double window_rate_se = 0.0;
        double qoe_cumulative = 0.0;
        double qoe_rate = 0.0;
        double qoe_of_mean = 0.0; ///< cumulative penalty of the trial-mean counters (aggregate rows)
        double prediction = 0.0;  ///< see predict_rates; NaN when over-loaded
        double ratio = 0.0;        ///< total_rate / prediction
        double window_ratio = 0.0; ///< window_rate / prediction
    };

    struct ExperimentResult
    {
        std::string name;
        std::size_t clients = 0;
        std::vector<MetricsRow> trials;     ///< policy, point, trial, slot order
        std::vector<MetricsRow> aggregates; ///< policy, point, slot order
        std::vector<std::string> warnings;

        [[nodiscard]] const MetricsRow &aggregate(const std::string &policy, std::size_t point,
                                                  std::int64_t slot) const;
    };

    /// Validates the spec, then runs every (policy, point, trial) episode.
    /// Trial seeds are derive_seed(seed, policy, point, trial); rows are
    /// ordered independently of the completion order of worker threads.
    [[nodiscard]] ExperimentResult run_experiment(const ExperimentSpec &spec);

    /// Header plus one line per row; doubles use the shortest round-trip form.
    void write_csv(std::ostream &out, const ExperimentResult &result, bool include_trials = true);
    [[nodiscard]] std::string summary_json(const ExperimentSpec &spec, const ExperimentResult &result);

    /// Writes <name>.csv and <name>.summary.json into `dir`; I/O failures
    /// are raised as std::runtime_error naming the file.
    void write_outputs(const std::filesystem::path &dir, const ExperimentSpec &spec, const ExperimentResult &result);

    struct VerifyEntry
    {
        std::string policy;
        std::size_t point = 0;
        CheckResult check;
    };

    struct VerifyReport
    {
        std::vector<VerifyEntry> entries;
        std::vector<std::string> warnings;
        [[nodiscard]] bool passed() const noexcept;
    };

    /// Minimum horizon for the stationarity proxy of the deficit spread.
    inline constexpr std::int64_t kCollapseMinHorizon = 10'000;

    /// Runs the invariant monitors, the per-path aggregate bound and, for
    /// WLD at load <= 1, the stationarity proxy of the weighted deficits on
    /// every (policy, point) of the spec with `trials` episodes each.
    [[nodiscard]] VerifyReport verify(const ExperimentSpec &spec, int trials = 2);

    void print_report(std::ostream &out, const VerifyReport &report);

} // namespace vstream
