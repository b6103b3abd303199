#pragma once

// Versioned binary snapshot of named parameter tensors plus the prototype memory.
//
// Layout (little-endian):
//   "SFDCKPT\0"  u32 version  u32 tensor_count
//   per tensor:  u32 name_len, name bytes, u32 rank, u64 dims[rank], f64 values[prod(dims)]
//   u32 prototype_count
//   per entry:   i32 class_id, i32 task, u64 dim, f64 values[dim]

#include <cstdint>
#include <filesystem>

#include "sfd/nn.hpp"
#include "sfd/translation.hpp"

namespace sfd::checkpoint {

inline constexpr std::uint32_t kVersion = 1;

struct Checkpoint {
  NamedTensors tensors;
  translation::PrototypeMemory memory;
};

void save(const std::filesystem::path& file, const NamedTensors& tensors,
          const translation::PrototypeMemory& memory = {});
Checkpoint load(const std::filesystem::path& file);

/// Copies values into `target` by name. Every target name must be present
/// with the same shape; extra checkpoint entries are ignored.
void restore(const Checkpoint& source, const NamedTensors& target);

}  // namespace sfd::checkpoint
