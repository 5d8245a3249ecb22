#pragma once

// Versioned text checkpoint: named tensors with shapes, values as C99
// hexadecimal floats so a load reproduces every bit.
//
//   kdi-checkpoint 1
//   meta <n>
//   key=value            (n lines)
//   tensors <m>
//   tensor <name> <rank> <d0> ... <dk>
//   <values, space separated, one line>

#include <filesystem>
#include <string>
#include <vector>

#include "kdi/keyvalue.hpp"
#include "kdi/tensor.hpp"

namespace kdi {

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct Checkpoint {
  KeyValue meta;
  std::vector<NamedTensor> tensors;

  const Tensor& find(const std::string& name) const;  // throws ValidationError
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::string& text);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace kdi
