#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "engrank/features.hpp"
#include "engrank/rng.hpp"

namespace engrank::cli {

nlohmann::json read_json_file(const std::filesystem::path& path);
// Pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void ensure_dir(const std::filesystem::path& dir);

std::string build_id();
std::string now_iso8601();

// manifest.json next to the artifacts: subcommand, build id, creation
// time, effective config, seeds and artifact names.
void write_manifest(const std::filesystem::path& dir, const std::string& subcommand,
                    const nlohmann::json& config, const nlohmann::json& seeds,
                    const std::vector<std::string>& artifacts);

// Preset name, JSON file holding a mask, or comma-separated indices.
FeatureMask parse_mask(const std::string& spec);

// tweet_id -> engagement from a feature CSV or an interactions file.
std::map<std::string, double> read_labels(const std::filesystem::path& path);

std::vector<std::string> split_list(const std::string& s, char sep = ',');

// Model parameters from a file: either a bare parameter object or an
// object with a "params" member (as written by `tune`).
nlohmann::json read_params(const std::filesystem::path& path);

}  // namespace engrank::cli
