// SPDX-License-Identifier: Apache-2.0
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "ssou/engine.hpp"

namespace ssou::engine {

namespace {

constexpr const char* kMagic = "# ssou-dataset v1";
constexpr const char* kColumns = "sequence_id,token_index,x,y";

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InvalidParameter("malformed number in dataset: '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InvalidParameter("malformed integer in dataset: '" + s + "'");
  return v;
}

}  // namespace

void write_dataset_csv(std::ostream& out, const Dataset& dataset) {
  const auto& p = dataset.params;
  out << kMagic << " kappa=" << format_double(p.kappa)
      << " diffusion=" << format_double(p.diffusion)
      << " trap_center=" << format_double(p.trap_center) << " memory_k=" << p.memory_k
      << " dt=" << format_double(p.dt) << " total_time=" << format_double(p.total_time)
      << " stride=" << p.stride << " burn_in=" << format_double(p.burn_in)
      << " base_seed=" << dataset.base_seed << '\n';
  out << kColumns << '\n';
  for (std::size_t i = 0; i < dataset.inputs.size(); ++i) {
    const auto& x = dataset.inputs[i];
    const auto& y = dataset.targets[i];
    for (std::size_t t = 0; t < x.size(); ++t)
      out << i << ',' << t << ',' << format_double(x[t]) << ',' << int(y[t]) << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kMagic, 0) != 0)
    throw InvalidParameter("not an ssou dataset: missing header record");

  std::map<std::string, std::string> fields;
  std::istringstream header(line.substr(std::string(kMagic).size()));
  for (std::string token; header >> token;) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw InvalidParameter("bad header field '" + token + "'");
    fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  auto field = [&](const char* key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw InvalidParameter(std::string("header lacks ") + key);
    return it->second;
  };

  Dataset data;
  data.params.kappa = parse_double(field("kappa"));
  data.params.diffusion = parse_double(field("diffusion"));
  data.params.trap_center = parse_double(field("trap_center"));
  data.params.memory_k = static_cast<int>(parse_u64(field("memory_k")));
  data.params.dt = parse_double(field("dt"));
  data.params.total_time = parse_double(field("total_time"));
  data.params.stride = static_cast<int>(parse_u64(field("stride")));
  data.params.burn_in = parse_double(field("burn_in"));
  data.base_seed = parse_u64(field("base_seed"));

  if (!std::getline(in, line) || line != kColumns)
    throw InvalidParameter("dataset column header mismatch");

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string cols[4];
    std::size_t start = 0;
    for (int c = 0; c < 4; ++c) {
      const auto comma = c < 3 ? line.find(',', start) : line.size();
      if (comma == std::string::npos) throw InvalidParameter("short dataset row: " + line);
      cols[c] = line.substr(start, comma - start);
      start = comma + 1;
    }
    const auto seq = parse_u64(cols[0]);
    const auto tok = parse_u64(cols[1]);
    if (seq == data.inputs.size()) {
      data.inputs.emplace_back();
      data.targets.emplace_back();
    } else if (seq + 1 != data.inputs.size()) {
      throw InvalidParameter("dataset rows out of order at sequence " + cols[0]);
    }
    if (tok != data.inputs.back().size())
      throw InvalidParameter("dataset tokens out of order at sequence " + cols[0]);
    const auto y = parse_u64(cols[3]);
    if (y > 1) throw InvalidParameter("target outside {0,1}");
    data.inputs.back().push_back(parse_double(cols[2]));
    data.targets.back().push_back(static_cast<std::uint8_t>(y));
  }
  return data;
}

}  // namespace ssou::engine
