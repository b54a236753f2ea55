#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcc/lyapunov.hpp"
#include "dcc/simulator.hpp"
#include "dcc/stationarity.hpp"

namespace dcc {

/// Shortest decimal string that parses back to the same binary64.
std::string format_double(double x);

nlohmann::json to_json(const BoundConstants& c);
nlohmann::json to_json(const StationarityReport& rep);
nlohmann::json to_json(const TrajectorySummary& s);
nlohmann::json to_json(const EnsembleResult& e);
nlohmann::json to_json(const LyapunovEstimate& e);
nlohmann::json to_json(const std::vector<MomentEstimate>& moments);

std::string to_text(const StationarityReport& rep);
std::string to_text(const TrajectorySummary& s);
std::string to_text(const LyapunovEstimate& e);

/// Header t, z_1..z_m, h_1..h_m, Q_i_j, R_i_j (vech order, 1-based); LF line ends.
std::string trajectory_csv(const Trajectory& traj, std::size_t m);

/// Writes through a temporary file in the same directory and renames it over
/// `path`, so readers never see a partial file. IoError on failure.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace dcc
