#include "output.hpp"

#include <cstdio>
#include <fstream>

#include "nlnoise/error.hpp"

namespace nlnoise::cli {

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_cell(const Cell& cell) {
  if (const double* d = std::get_if<double>(&cell)) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12e", *d);
    return buf;
  }
  if (const std::string* s = std::get_if<std::string>(&cell)) return quote(*s);
  return {};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

std::string format_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += quote(table.columns[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

Json make_manifest(const ExperimentConfig& cfg, const RunOutput& out) {
  Json m;
  m["manifest_version"] = 1;
  m["tool"] = "nlnoise";
  m["version"] = kToolVersion;
  m["command"] = std::string(command_name(cfg.command));
  m["seed"] = cfg.seed;
  m["config"] = cfg.tree;
  m["points"] = out.results.rows.size();
  m["failed_points"] = out.failed_points;
  m["rel_err_floor"] = kRelErrFloor;
  Json files = Json::array({"results.csv"});
  for (const auto& [name, t] : out.tables) files.push_back(name);
  for (const auto& [name, t] : out.files) files.push_back(name);
  files.push_back("run.log");
  m["outputs"] = files;
  m["build"] = {{"compiler", __VERSION__},
                {"cplusplus", static_cast<long>(__cplusplus)},
                {"json_library",
                 std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                     std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                     std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  return m;
}

void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                   const RunOutput& out) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  write_text(dir / "results.csv", format_csv(out.results));
  for (const auto& [name, table] : out.tables) write_text(dir / name, format_csv(table));
  for (const auto& [name, text] : out.files) write_text(dir / name, text);
  write_text(dir / "manifest.json", make_manifest(cfg, out).dump(2) + "\n");
  std::string log;
  log += "command " + std::string(command_name(cfg.command)) + ", seed " +
         std::to_string(cfg.seed) + ", " + std::to_string(out.results.rows.size()) +
         " point(s), " + std::to_string(out.failed_points) + " failed\n";
  for (const auto& line : out.log) log += line + "\n";
  write_text(dir / "run.log", log);
}

}  // namespace nlnoise::cli
