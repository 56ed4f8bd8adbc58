#include "ovalcert/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "ovalcert/hash.hpp"

namespace ovalcert {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json to_json(const std::vector<ArtifactRef>& refs) {
  json a = json::array();
  for (const auto& r : refs) a.push_back({{"name", r.name}, {"path", r.path}, {"sha256", r.sha256}});
  return a;
}

std::vector<ArtifactRef> refs_from(const json& a) {
  std::vector<ArtifactRef> out;
  for (const auto& r : a) {
    out.push_back({r.at("name").get<std::string>(), r.at("path").get<std::string>(),
                   r.at("sha256").get<std::string>()});
  }
  return out;
}

}  // namespace

ArtifactRef artifact(const std::string& name, const fs::path& file, const fs::path& manifest_dir) {
  std::string path = file.string();
  std::error_code ec;
  const fs::path rel = fs::relative(fs::absolute(file), fs::absolute(manifest_dir), ec);
  if (!ec && !rel.empty() && rel.native().rfind("..", 0) != 0) path = rel.string();
  return {name, path, sha256_file(file)};
}

void append_record(const fs::path& manifest, const StageRecord& r) {
  json j;
  j["stage"] = r.stage;
  j["params"] = r.params;
  j["inputs"] = to_json(r.inputs);
  j["outputs"] = to_json(r.outputs);
  json results = json::object();
  for (const auto& [k, v] : r.results) results[k] = json::parse(v);
  j["results"] = results;
  j["seconds"] = r.seconds;
  j["jobs"] = r.jobs;
  j["seed"] = r.seed;
  if (manifest.has_parent_path()) fs::create_directories(manifest.parent_path());
  std::ofstream out(manifest, std::ios::app);
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("cannot append to manifest " + manifest.string());
}

std::vector<StageRecord> read_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("cannot read manifest " + manifest.string());
  std::vector<StageRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      StageRecord r;
      r.stage = j.at("stage").get<std::string>();
      r.params = j.at("params").get<std::map<std::string, std::string>>();
      r.inputs = refs_from(j.at("inputs"));
      r.outputs = refs_from(j.at("outputs"));
      for (const auto& [k, v] : j.at("results").items()) r.results[k] = v.dump();
      r.seconds = j.at("seconds").get<double>();
      r.jobs = j.at("jobs").get<int>();
      r.seed = j.at("seed").get<std::uint64_t>();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw std::runtime_error("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> verify_manifest(const fs::path& manifest) {
  std::vector<std::string> problems;
  const fs::path dir = manifest.parent_path();
  auto resolve = [&](const ArtifactRef& a) {
    const fs::path p(a.path);
    return p.is_absolute() ? p : dir / p;
  };
  std::map<std::string, std::string> produced;  // path -> hash of latest output
  for (const auto& r : read_manifest(manifest)) {
    for (const auto& in : r.inputs) {
      const fs::path p = resolve(in);
      if (auto it = produced.find(p.string()); it != produced.end() && it->second != in.sha256) {
        problems.push_back(r.stage + ": input " + in.path + " differs from the stage that wrote it");
      }
      if (!fs::exists(p)) problems.push_back(r.stage + ": input " + in.path + " is missing");
    }
    for (const auto& out : r.outputs) produced[resolve(out).string()] = out.sha256;
  }
  // Only the latest version of each artifact has to survive on disk.
  for (const auto& [path, hash] : produced) {
    if (!fs::exists(path)) {
      problems.push_back("output " + path + " is missing");
    } else if (sha256_file(path) != hash) {
      problems.push_back("output " + path + " does not match its recorded hash");
    }
  }
  return problems;
}

}  // namespace ovalcert
