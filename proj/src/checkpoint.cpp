// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <type_traits>

#include "ssou/learners.hpp"

namespace ssou::learn {

namespace {

constexpr char kMagic[8] = {'S', 'S', 'O', 'U', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T)))
    throw InvalidParameter("truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

}  // namespace

void write_checkpoint(std::ostream& out, const ModelState& state) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(state.spec.kind));
  put<std::int32_t>(out, state.spec.window);
  put<std::int32_t>(out, state.spec.filters);
  put<std::int32_t>(out, state.spec.hidden);
  put<std::uint64_t>(out, state.step);
  put<std::uint64_t>(out, state.params.size());
  for (const auto* buffer : {&state.params, &state.m, &state.v})
    for (double v : *buffer) put<double>(out, v);
  if (!out) throw Error("checkpoint write failed");
}

ModelState read_checkpoint(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw InvalidParameter("not a model checkpoint");
  if (get<std::uint32_t>(in) != kVersion) throw InvalidParameter("unsupported checkpoint version");
  const auto kind = get<std::uint32_t>(in);
  if (kind > static_cast<std::uint32_t>(ModelKind::GRU)) throw InvalidParameter("unknown model kind");
  ModelState state;
  state.spec.kind = static_cast<ModelKind>(kind);
  state.spec.window = get<std::int32_t>(in);
  state.spec.filters = get<std::int32_t>(in);
  state.spec.hidden = get<std::int32_t>(in);
  state.spec.validate();
  state.step = get<std::uint64_t>(in);
  const auto n = get<std::uint64_t>(in);
  if (n != state.spec.parameter_count())
    throw InvalidParameter("checkpoint parameter count does not match " + state.spec.id());
  for (auto* buffer : {&state.params, &state.m, &state.v}) {
    buffer->resize(n);
    for (double& v : *buffer) v = get<double>(in);
  }
  return state;
}

void write_loss_history(std::ostream& out, std::span<const double> history) {
  out << "epoch,mean_loss\n";
  out.precision(17);
  for (std::size_t e = 0; e < history.size(); ++e) out << e << ',' << history[e] << '\n';
}

}  // namespace ssou::learn
