#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace abslab {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a over the label bytes.
std::uint64_t label_hash(std::string_view label);

// Seed of the stream named `label` under `master`. Streams with different
// labels are independent for practical purposes.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

// Seed of the `index`-th child of a stream (per-environment streams).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

inline Rng make_stream(std::uint64_t master, std::string_view label) {
  return Rng(derive_seed(master, label));
}

// Labels of the streams a training run derives from its master seed.
namespace stream {
inline constexpr std::string_view kEnv = "env";
inline constexpr std::string_view kInit = "init";
inline constexpr std::string_view kShuffle = "shuffle";
inline constexpr std::string_view kScheduler = "scheduler";
inline constexpr std::string_view kPolicySample = "policy-sample";
}  // namespace stream

}  // namespace abslab
