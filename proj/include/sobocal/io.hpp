#pragma once

#include <json.hpp>

#include "sobocal/regression.hpp"

namespace sobocal {

using nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";

// deterministic shortest-ish representation (17 significant digits)
std::string format_double(double v);

// numeric CSV with optional '#' comment lines before the header row
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const MatrixXd& rows, const std::vector<std::string>& comments = {});

// header `x1,...,xd,y`; throws IoError with the offending line number
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::vector<std::string>& comments = {});

json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

// run provenance block written into every output (no wall-clock content,
// so reruns are byte-identical)
json make_manifest(const std::string& subcommand, const std::string& config_path,
                   const json& resolved_config, uint64_t seed, const std::string& outdir);
std::vector<std::string> manifest_comments(const json& manifest);

}  // namespace sobocal
