#pragma once
// CSV / JSON artifact writers. Floating-point values are serialized with
// 17 significant digits so round trips are bit-faithful; timestamps live
// in a separate metadata field so payloads compare byte-identical across
// reruns.

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nldiff/pde.hpp"
#include "nldiff/selfsimilar.hpp"

namespace nldiff {

std::string fmt17(double v);

void write_text(const std::string& path, const std::string& text);

void write_profile_csv(const std::string& path, const Profile& p);

void write_series_csv(const std::string& path,
                      const std::vector<std::pair<double, double>>& series,
                      const std::string& header);

void write_field_csv(const std::string& path, const Grid& grid,
                     const std::vector<double>& values);

void write_segments_csv(const std::string& path,
                        const std::vector<std::array<double, 4>>& segments);

// profile summary record {kind, c, v_prime_at_zero, mass_residual,
// match_point}
nlohmann::json profile_summary(const Profile& p);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace nldiff
