#include "io.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "engrank/dataset.hpp"
#include "engrank/error.hpp"
#include "engrank/feature_table.hpp"
#include "engrank/timeutil.hpp"

#ifndef ENGRANK_BUILD_ID
#define ENGRANK_BUILD_ID "unknown"
#endif

namespace engrank::cli {

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string(), {{"path", path.string()}});
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidConfig, "malformed JSON in " + path.string() + ": " + e.what(),
                {{"path", path.string()}});
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string(), {{"path", path.string()}});
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string(), {{"path", path.string()}});
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorKind::kIo, "cannot create directory " + dir.string(),
                {{"path", dir.string()}, {"reason", ec.message()}});
  }
}

std::string build_id() { return ENGRANK_BUILD_ID; }

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  return format_iso8601(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

void write_manifest(const std::filesystem::path& dir, const std::string& subcommand,
                    const nlohmann::json& config, const nlohmann::json& seeds,
                    const std::vector<std::string>& artifacts) {
  write_json_file(dir / "manifest.json", {{"manifest_version", 1},
                                          {"subcommand", subcommand},
                                          {"build_id", build_id()},
                                          {"created_at", now_iso8601()},
                                          {"config", config},
                                          {"seeds", seeds},
                                          {"artifacts", artifacts}});
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

FeatureMask parse_mask(const std::string& spec) {
  if (spec == "all" || spec == "compact-11") return FeatureMask::preset(spec);
  if (std::filesystem::exists(spec)) {
    const auto j = read_json_file(spec);
    return mask_from_json(j.contains("mask") ? j.at("mask") : j);
  }
  std::vector<std::size_t> idx;
  for (const auto& s : split_list(spec)) {
    try {
      idx.push_back(static_cast<std::size_t>(std::stoul(s)));
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInvalidConfig, "mask must be a preset, a file or indices",
                  {{"mask", spec}});
    }
  }
  FeatureMask m = FeatureMask::from_indices(idx);
  m.validate();
  return m;
}

std::map<std::string, double> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string(), {{"path", path.string()}});
  std::string first;
  std::getline(in, first);
  if (first.rfind("\xEF\xBB\xBF", 0) == 0) first.erase(0, 3);
  in.clear();
  in.seekg(0);
  if (first.rfind("tweet_id,user_id,engagement", 0) == 0) {
    return read_feature_csv(in, path.string()).label_map();
  }
  const auto ext = path.extension().string();
  const DataFormat format =
      (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") ? DataFormat::kJsonl : DataFormat::kCsv;
  std::map<std::string, double> labels;
  for (const auto& i : read_interactions(in, format, path.string())) {
    labels[i.tweet_id] = static_cast<double>(i.engagement);
  }
  return labels;
}

nlohmann::json read_params(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  if (j.is_object() && j.contains("params") && j.at("params").is_object()) return j.at("params");
  if (!j.is_object()) throw Error(ErrorKind::kInvalidConfig, "parameters must be a JSON object");
  return j;
}

}  // namespace engrank::cli
