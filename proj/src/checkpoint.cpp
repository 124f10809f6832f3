#include "abslab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "abslab/error.hpp"

namespace abslab::net {

namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw IoError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
  pos += 8;
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const MlpParams& params) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + 16 * params.layer_count() + 8 * params.size());
  put_u64(out, static_cast<std::uint64_t>(params.layer_count()));
  for (int l = 0; l < params.layer_count(); ++l) {
    put_u64(out, static_cast<std::uint64_t>(params.layer(l).in));
    put_u64(out, static_cast<std::uint64_t>(params.layer(l).out));
  }
  for (double v : params.flatten()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

MlpParams decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  const std::uint64_t layers = get_u64(bytes, pos);
  if (layers == 0 || layers > 4096) throw IoError(fmt::format("bad checkpoint layer count {}", layers));
  std::vector<int> fan_in(layers), fan_out(layers);
  for (std::uint64_t l = 0; l < layers; ++l) {
    fan_in[l] = static_cast<int>(get_u64(bytes, pos));
    fan_out[l] = static_cast<int>(get_u64(bytes, pos));
    if (fan_in[l] <= 0 || fan_out[l] <= 0) throw IoError("bad checkpoint layer shape");
    if (l > 0 && fan_in[l] != fan_out[l - 1]) throw IoError("checkpoint layer shapes do not chain");
  }
  std::vector<int> hidden(fan_out.begin(), fan_out.end() - 1);
  MlpParams params(fan_in.front(), hidden, fan_out.back());
  const std::size_t expected = pos + 8 * params.size();
  if (bytes.size() != expected) {
    throw IoError(fmt::format("checkpoint holds {} bytes, header implies {}", bytes.size(), expected));
  }
  Vector values(static_cast<Eigen::Index>(params.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = std::bit_cast<double>(get_u64(bytes, pos));
  params.unflatten(values);
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const MlpParams& params) {
  const auto bytes = encode_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write checkpoint {}", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("failed writing checkpoint {}", path.string()));
}

MlpParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read checkpoint {}", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace abslab::net
