#pragma once

#include <string>

#include "platoon/sim.hpp"

namespace platoon {

// CSV writers. Column order is fixed; numbers use printf formats so output is
// byte-identical across runs.
std::string trips_csv(const MetricsReport& r);
std::string edges_csv(const MetricsReport& r);
std::string policy_csv(const MetricsReport& r);
std::string summary_csv(const MetricsReport& r);

// Writes the four files into dir (created if missing). Throws Error on I/O failure.
void write_report(const MetricsReport& r, const std::string& dir);

// Sum of per-edge record costs minus the trip total, maximised over trips.
double max_accounting_error(const MetricsReport& r);

}  // namespace platoon
