#include "trajclass/dataset_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "trajclass/error.hpp"

namespace trajclass {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "read failed for '" + path.string() + "'");
  return buf.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

json to_json(const Manifest& manifest) {
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    entries.push_back({{"id", e.id},
                       {"label", to_string(e.label)},
                       {"system", to_string(e.system)},
                       {"path", e.path}});
  }
  return {{"format", "trajclass-manifest"}, {"version", 1}, {"meta", manifest.meta},
          {"trajectories", std::move(entries)}};
}

Manifest manifest_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("", "manifest must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "format" && key != "version" && key != "meta" && key != "trajectories") {
      throw ValidationError("/" + key, "unknown key");
    }
  }
  if (doc.value("format", "") != "trajclass-manifest") {
    throw ValidationError("/format", "expected \"trajclass-manifest\"");
  }
  if (!doc.contains("version") || doc["version"] != 1) throw ValidationError("/version", "expected 1");
  Manifest m;
  if (doc.contains("meta")) m.meta = doc["meta"];
  if (!doc.contains("trajectories") || !doc["trajectories"].is_array()) {
    throw ValidationError("/trajectories", "expected an array");
  }
  std::set<std::string> ids;
  std::size_t i = 0;
  for (const auto& j : doc["trajectories"]) {
    const std::string at = "/trajectories/" + std::to_string(i++);
    if (!j.is_object()) throw ValidationError(at, "expected an object");
    ManifestEntry e;
    for (const char* key : {"id", "label", "system", "path"}) {
      if (!j.contains(key) || !j[key].is_string()) throw ValidationError(at + "/" + key, "expected a string");
    }
    for (const auto& [key, _] : j.items()) {
      if (key != "id" && key != "label" && key != "system" && key != "path") {
        throw ValidationError(at + "/" + key, "unknown key");
      }
    }
    e.id = j["id"].get<std::string>();
    e.path = j["path"].get<std::string>();
    try {
      e.label = parse_pattern_label(j["label"].get<std::string>());
    } catch (const Error& err) {
      throw ValidationError(at + "/label", err.what());
    }
    try {
      e.system = parse_coordinate_system(j["system"].get<std::string>());
    } catch (const Error& err) {
      throw ValidationError(at + "/system", err.what());
    }
    if (!ids.insert(e.id).second) throw ValidationError(at + "/id", "duplicate id '" + e.id + "'");
    m.entries.push_back(std::move(e));
  }
  return m;
}

Manifest write_dataset(const fs::path& dir, std::span<const Trajectory> trajectories, const json& meta) {
  std::error_code ec;
  fs::create_directories(dir / "trajectories", ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + (dir / "trajectories").string() + "': " + ec.message());
  Manifest m;
  m.meta = meta;
  for (const auto& t : trajectories) {
    ManifestEntry e{t.id(), t.label(), t.system(), "trajectories/" + t.id() + ".csv"};
    write_file(dir / e.path, to_csv(t));
    m.entries.push_back(std::move(e));
  }
  write_file(dir / "manifest.json", to_json(m).dump(2) + "\n");
  return m;
}

std::vector<Trajectory> read_dataset(const fs::path& manifest_path) {
  json doc;
  try {
    doc = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, manifest_path.string() + ": " + e.what());
  }
  const auto m = manifest_from_json(doc);
  const auto base = manifest_path.parent_path();
  std::vector<Trajectory> out;
  out.reserve(m.entries.size());
  for (const auto& e : m.entries) {
    const auto path = base / e.path;
    try {
      out.push_back(parse_trajectory_csv(read_file(path), e.system, e.label, e.id));
    } catch (const ParseError& err) {
      throw Error(ErrorKind::Parse, path.string() + ": " + err.what());
    }
  }
  return out;
}

}  // namespace trajclass
