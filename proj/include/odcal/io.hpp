#pragma once

#include <map>
#include <string>

#include "odcal/measurements.hpp"
#include "odcal/network.hpp"

namespace odcal {

// JSON file formats. Writers emit a canonical form (sorted keys, trailing
// newline) so identical inputs produce byte-identical files.

std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);

std::string measurements_to_json(const FieldMeasurements& m);
FieldMeasurements measurements_from_json(const std::string& text);

/// Demand keyed by OD id; order of the ids vector defines the vector layout.
std::string demand_to_json(const std::vector<std::string>& od_ids, const DemandVector& d);
DemandVector demand_from_json(const std::string& text, const std::vector<std::string>& od_ids);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// FNV-1a content fingerprint used to tie calibration outputs to a scenario.
std::string content_fingerprint(const std::string& text);

}  // namespace odcal
