// csv_io.hpp: CSV writers for tables, trajectories, control solutions and ensemble statistics
//
// Every file starts with '#'-prefixed comment lines (the caller's header, typically the echoed
// configuration and the master seed), followed by one column-name row and the data rows.
// Numbers are printed with %.17g, so output is byte-identical for identical inputs.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nmqc/control.hpp"
#include "nmqc/ensemble.hpp"
#include "nmqc/kernels.hpp"
#include "nmqc/sde.hpp"

namespace nmqc {

std::string format_number(double v);

// Writes text as comment lines ("# " prefix on every line).
void write_comment_block(std::ostream& os, const std::string& text);

// t, Delta, gamma, Gamma1, Gamma2
void write_coefficients_csv(std::ostream& os, const CoefficientTable& table, const std::string& header);

// t, x, y, z, ux, uy, dW, Y, Lambda
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec, const std::string& header);

// t, ux, uy, l1, l2, l3, x, y, z, then a "# summary ..." line with cost, iterations, converged
void write_control_csv(std::ostream& os, const OCResult& res, const std::string& header);
std::string control_summary(const OCResult& res);

// t, mean_Lambda, var_Lambda, mean_x, mean_y, mean_z [, warning]
void write_ensemble_csv(std::ostream& os, const EnsembleStats& stats, const std::string& header,
                        int warning_flag = -1);

// JSON sidecar: configuration echo, seed, N, clamp_rate
std::string ensemble_sidecar_json(const EnsembleStats& stats, const std::string& config_echo);

// t, Lambda
void write_lambda_csv(std::ostream& os, const std::vector<double>& times, const std::vector<double>& lambda,
                      const std::string& header, int warning_flag = -1);

}  // namespace nmqc
