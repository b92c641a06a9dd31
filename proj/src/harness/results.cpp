// SPDX-License-Identifier: Apache-2.0
#include "ssou/harness/results.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ssou/error.hpp"
#include "ssou/harness/config.hpp"

namespace ssou::harness {

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field += ch;
    }
  }
  out.push_back(field);
  return out;
}

double to_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw InvalidParameter("bad number '" + s + "'");
  return v;
}

template <class T>
T to_integer(const std::string& s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw InvalidParameter("bad integer '" + s + "'");
  return v;
}

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

}  // namespace

std::string provenance_line(const Provenance& p) {
  return "# config_hash=" + hex64(p.config_hash) + " seed=" + std::to_string(p.seed) +
         " code_version=" + p.code_version;
}

std::string format_row(const ResultRow& r) {
  std::string s;
  s += std::to_string(r.cell) + ',' + std::to_string(r.k) + ',' + number(r.kappa) + ',' +
       number(r.diffusion) + ',' + std::to_string(r.stride) + ',' + quote(r.coord_name) + ',' +
       number(r.coord) + ',' + quote(r.model) + ',' + quote(r.metric) + ',' + number(r.value) + ',' +
       number(r.std_error) + ',' + std::to_string(r.n_effective) + ',' + quote(r.status);
  return s;
}

ResultWriter::ResultWriter(std::filesystem::path csv, Provenance provenance)
    : csv_(std::move(csv)), sidecar_(csv_.string() + ".progress"), provenance_(std::move(provenance)) {}

std::size_t ResultWriter::open() {
  namespace fs = std::filesystem;
  committed_ = 0;
  std::uintmax_t offset = 0;
  if (fs::exists(sidecar_) && fs::exists(csv_)) {
    std::ifstream in(sidecar_);
    std::string hash_field, cells_field, offset_field;
    in >> hash_field >> cells_field >> offset_field;
    if (in && hash_field == "config_hash=" + hex64(provenance_.config_hash) + ":" +
                               std::to_string(provenance_.seed) &&
        cells_field.rfind("cells=", 0) == 0 && offset_field.rfind("offset=", 0) == 0) {
      committed_ = to_integer<std::size_t>(cells_field.substr(6));
      offset = to_integer<std::uintmax_t>(offset_field.substr(7));
      if (offset > fs::file_size(csv_)) {
        committed_ = 0;
        offset = 0;
      }
    }
  }
  if (committed_ > 0) {
    fs::resize_file(csv_, offset);
    out_.open(csv_, std::ios::binary | std::ios::app);
  } else {
    out_.open(csv_, std::ios::binary | std::ios::trunc);
    out_ << provenance_line(provenance_) << '\n' << kResultColumns << '\n';
    out_.flush();
    write_sidecar(static_cast<std::uintmax_t>(out_.tellp()));
  }
  if (!out_) throw Error("cannot write " + csv_.string());
  return committed_;
}

void ResultWriter::commit(std::span<const ResultRow> rows) {
  for (const auto& r : rows) out_ << format_row(r) << '\n';
  out_.flush();
  if (!out_) throw Error("write to " + csv_.string() + " failed");
  ++committed_;
  write_sidecar(static_cast<std::uintmax_t>(out_.tellp()));
}

void ResultWriter::finish() {
  out_.close();
  std::filesystem::remove(sidecar_);
}

void ResultWriter::write_sidecar(std::uintmax_t offset) {
  const auto tmp = sidecar_.string() + ".tmp";
  {
    std::ofstream s(tmp, std::ios::trunc);
    s << "config_hash=" << hex64(provenance_.config_hash) << ':' << provenance_.seed
      << " cells=" << committed_ << " offset=" << offset << '\n';
  }
  std::filesystem::rename(tmp, sidecar_);
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& csv, Provenance* provenance) {
  std::ifstream in(csv);
  if (!in) throw InvalidParameter("cannot open " + csv.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("# config_hash=", 0) != 0)
    throw InvalidParameter(csv.string() + ": missing provenance line");
  if (provenance) {
    std::istringstream fields(line.substr(2));
    for (std::string tok; fields >> tok;) {
      const auto eq = tok.find('=');
      const auto key = tok.substr(0, eq);
      const auto val = tok.substr(eq + 1);
      if (key == "config_hash") provenance->config_hash = std::stoull(val, nullptr, 16);
      if (key == "seed") provenance->seed = to_integer<std::uint64_t>(val);
      if (key == "code_version") provenance->code_version = val;
    }
  }
  if (!std::getline(in, line) || line != kResultColumns)
    throw InvalidParameter(csv.string() + ": unexpected column header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 13) throw InvalidParameter(csv.string() + ": wrong field count in '" + line + "'");
    ResultRow r;
    r.cell = to_integer<std::size_t>(f[0]);
    r.k = to_integer<int>(f[1]);
    r.kappa = to_double(f[2]);
    r.diffusion = to_double(f[3]);
    r.stride = to_integer<int>(f[4]);
    r.coord_name = f[5];
    r.coord = to_double(f[6]);
    r.model = f[7];
    r.metric = f[8];
    r.value = to_double(f[9]);
    r.std_error = to_double(f[10]);
    r.n_effective = to_integer<std::size_t>(f[11]);
    r.status = f[12];
    rows.push_back(std::move(r));
  }
  return rows;
}

void validate_results_csv(const std::filesystem::path& csv, const std::filesystem::path& schema) {
  std::ifstream sin(schema);
  if (!sin) throw InvalidParameter("cannot open schema " + schema.string());
  const auto desc = nlohmann::json::parse(sin);

  std::vector<std::string> names;
  std::vector<std::string> types;
  for (const auto& col : desc.at("columns")) {
    names.push_back(col.at("name").get<std::string>());
    types.push_back(col.at("type").get<std::string>());
  }
  std::set<std::string> statuses;
  for (const auto& s : desc.at("status_values")) statuses.insert(s.get<std::string>());
  const std::string prefix = desc.at("provenance_prefix").get<std::string>();

  std::ifstream in(csv);
  if (!in) throw InvalidParameter("cannot open " + csv.string());
  std::string line;
  auto fail = [&](std::size_t lineno, const std::string& what) {
    throw InvalidParameter(csv.string() + ":" + std::to_string(lineno) + ": " + what);
  };
  if (!std::getline(in, line) || line.rfind(prefix, 0) != 0) fail(1, "missing provenance line");
  std::string header;
  for (std::size_t i = 0; i < names.size(); ++i) header += (i ? "," : "") + names[i];
  if (!std::getline(in, line) || line != header) fail(2, "column header differs from schema");
  std::size_t lineno = 2;
  std::size_t last_cell = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = split_csv(line);
    if (f.size() != names.size()) fail(lineno, "expected " + std::to_string(names.size()) + " fields");
    for (std::size_t i = 0; i < f.size(); ++i) {
      try {
        if (types[i] == "integer") {
          to_integer<long long>(f[i]);
        } else if (types[i] == "number") {
          to_double(f[i]);
        } else if (f[i].empty()) {
          fail(lineno, "empty " + names[i]);
        }
      } catch (const InvalidParameter&) {
        fail(lineno, "column " + names[i] + " is not of type " + types[i]);
      }
    }
    const auto cell = to_integer<std::size_t>(f[0]);
    if (cell < last_cell) fail(lineno, "cells out of order");
    last_cell = cell;
    if (!statuses.count(f.back())) fail(lineno, "unknown status '" + f.back() + "'");
  }
}

std::filesystem::path default_schema_path() { return SSOU_SCHEMA_PATH; }

}  // namespace ssou::harness
