#pragma once

// Command-line pipeline: simulate -> dataset -> train -> eval -> explain ->
// report. Every command reads a flat key=value config (file plus flag
// overrides) and writes its artifacts under `out`.

#include <iosfwd>
#include <string>

#include "kdi/keyvalue.hpp"

namespace kdi {

// Exit codes: 0 success, 1 validation error, 2 I/O error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

void cmd_simulate(const KeyValue& config, std::ostream& log);
void cmd_dataset(const KeyValue& config, std::ostream& log);
void cmd_train(const KeyValue& config, std::ostream& log);
void cmd_eval(const KeyValue& config, std::ostream& log);
void cmd_explain(const KeyValue& config, std::ostream& log);
void cmd_report(const KeyValue& config, std::ostream& log);

// Artifact names inside `out`.
inline constexpr const char* kManifestFile = "dataset.manifest";
inline constexpr const char* kCheckpointFile = "model.ckpt";
inline constexpr const char* kMetricsReportFile = "metrics.txt";
inline constexpr const char* kMetricsCsvFile = "metrics.csv";
inline constexpr const char* kUtilizationCsvFile = "utilization.csv";

}  // namespace kdi
