// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#ifndef IRSLENS_SCENARIO_IO_HPP
#define IRSLENS_SCENARIO_IO_HPP

#include "irslens/types.hpp"

#include <string>

namespace irslens {

// Config files are malformed: message carries the JSON field path.
class config_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

double dbm_to_watts(double dbm);
double db_to_linear(double db);

// Reference configuration: 28 GHz downlink, M=151 lens antennas, L=2 IRSs
// with N=80 elements, K=12 users, 20 RF chains, 6-bit phases.
Scenario paper_profile();

// Small configuration for fast runs and tests: M=31, N=16, L=2, K=4,
// N_RF=8, B=4.
Scenario desk_profile();

// Per-element IRS power draw for the known phase resolutions (5- and 6-bit).
// Other resolutions need an explicit p_n_w in the scenario file.
bool pn_lookup_w(arma::uword bits, double& out_w);

// Parses a scenario JSON document on top of `base`; missing fields keep the
// base values. dBm/dB fields are converted to watts/linear at load. Unknown
// keys and invariant violations raise config_error with the field path.
Scenario scenario_from_json(const std::string& json_text, const Scenario& base);

// Reads the file at `path` and applies scenario_from_json over the base.
Scenario load_scenario(const std::string& path, const Scenario& base);
Scenario load_scenario(const std::string& path); // base = paper profile

// Effective configuration echoed back as a JSON document (powers in watts).
std::string scenario_to_json(const Scenario& scenario);

} // namespace irslens

#endif
