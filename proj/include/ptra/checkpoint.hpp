#pragma once

#include <cstdint>
#include <filesystem>

#include "ptra/network.hpp"

namespace ptra::nn {

/// Actor + critic parameters with the training step they were taken at.
///
/// On disk: a JSON object with "version", "hidden_dim", "seed", "step" and
/// one entry per array ("actor.<name>", "critic.<name>") stored as a list of
/// rows. Doubles are written with round-trip precision.
struct Checkpoint {
  int hidden_dim = 0;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  PolicyParams policy;
  CriticParams critic;
};

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws ParseError naming the missing or malformed entry.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ptra::nn
