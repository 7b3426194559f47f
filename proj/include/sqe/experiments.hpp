#pragma once

#include "sqe/config.hpp"
#include "sqe/report.hpp"

namespace sqe {

// Runs the named experiment. Config errors propagate as ConfigError; any other failure
// is caught and recorded as an aborted report with a failing metric.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// The three experiments that only exist at harness level.
ExperimentReport wick_covariance_experiment(const ExperimentConfig& cfg);
ExperimentReport restart_experiment(const ExperimentConfig& cfg);
ExperimentReport dissipation_experiment(const ExperimentConfig& cfg);
ExperimentReport kernel_bounds_experiment(const ExperimentConfig& cfg);

}  // namespace sqe
