#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "subfuse/dataset.hpp"
#include "subfuse/screening.hpp"
#include "subfuse/simulation.hpp"
#include "subfuse/tuning.hpp"

namespace subfuse {

// CSV dialect used everywhere: comma separator, '.' decimal point, one header
// row, UTF-8, no quoting. Doubles are printed with 17 significant digits so a
// write/read round trip is exact.

std::string format_double(double v);

/// Reads a numeric CSV whose last column is the response. When add_intercept
/// is set an all-ones column is prepended to the covariates.
RegressionDataset read_dataset_csv(const std::string& path, bool add_intercept);

void write_dataset_csv(const std::string& path, const RegressionDataset& data);

void write_results_csv(std::ostream& out, const ExperimentConfig& config,
                       const ExperimentResult& result);

void write_tuning_csv(std::ostream& out, const TuningReport& report);

void write_probs_csv(std::ostream& out, const Vector& scores, const Vector& pi);

void write_screening_csv(std::ostream& out, const ScreeningResult& result);

}  // namespace subfuse
