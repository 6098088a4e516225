#pragma once

// Single-file named-tensor container shared by checkpoints and filter banks.
//
// Layout (little-endian):
//   "IGKT"  u32 version
//   u32 meta_count   { str key, str value } * meta_count
//   u32 tensor_count { str name, u8 dtype, u32 rank, u64 dims[rank], payload } * tensor_count
// where str is u32 length + bytes and dtype 0 = f64, 1 = f32.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "igkit/tensor.hpp"

namespace igkit::io {

enum class DType : std::uint8_t { F64 = 0, F32 = 1 };

inline constexpr std::uint32_t kContainerVersion = 1;

struct Record {
  std::string name;
  Tensor tensor;
  DType dtype = DType::F64;
};

struct Container {
  std::map<std::string, std::string> meta;
  std::vector<Record> tensors;

  void add(const std::string& name, Tensor t, DType dtype = DType::F64);
  bool has(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  const std::string& meta_value(const std::string& key) const;
  /// Scalar count over tensors whose names start with `prefix`.
  std::int64_t count(const std::string& prefix = "") const;
};

std::vector<std::uint8_t> serialize(const Container& c);
Container deserialize(const std::vector<std::uint8_t>& bytes);
void save(const std::filesystem::path& path, const Container& c);
Container load(const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes);
/// FNV-1a of a file's bytes, as 16 lowercase hex digits.
std::string file_hash(const std::filesystem::path& path);

}  // namespace igkit::io
