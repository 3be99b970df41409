#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "gaittrack/errors.hpp"

namespace gait::blob {

// Little-endian tensor blob: magic "GTB1", u8 dtype (1 = f32, 2 = f64),
// u8 rank, u16 zero, u64 dims[rank], payload.
inline constexpr char kMagic[4] = {'G', 'T', 'B', '1'};

template <class S>
constexpr std::uint8_t dtype_of() {
  static_assert(std::is_same_v<S, float> || std::is_same_v<S, double>);
  return std::is_same_v<S, float> ? 1 : 2;
}

template <class S>
void write(std::ostream& out, const std::vector<std::int64_t>& dims, const S* data) {
  out.write(kMagic, 4);
  const std::uint8_t dtype = dtype_of<S>();
  const std::uint8_t rank = static_cast<std::uint8_t>(dims.size());
  const std::uint16_t pad = 0;
  out.write(reinterpret_cast<const char*>(&dtype), 1);
  out.write(reinterpret_cast<const char*>(&rank), 1);
  out.write(reinterpret_cast<const char*>(&pad), 2);
  std::int64_t count = 1;
  for (std::int64_t d : dims) {
    out.write(reinterpret_cast<const char*>(&d), 8);
    count *= d;
  }
  out.write(reinterpret_cast<const char*>(data), count * static_cast<std::int64_t>(sizeof(S)));
  if (!out) fail(ErrorCode::io_error, "blob write failed");
}

template <class S>
struct Tensor {
  std::vector<std::int64_t> dims;
  std::vector<S> data;
};

template <class S>
Tensor<S> read(std::istream& in, const std::string& context) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != std::string_view(kMagic, 4))
    fail(ErrorCode::io_error, context + ": not a tensor blob");
  std::uint8_t dtype = 0, rank = 0;
  std::uint16_t pad = 0;
  in.read(reinterpret_cast<char*>(&dtype), 1);
  in.read(reinterpret_cast<char*>(&rank), 1);
  in.read(reinterpret_cast<char*>(&pad), 2);
  if (dtype != dtype_of<S>())
    fail(ErrorCode::io_error, context + ": dtype mismatch (file " + std::to_string(dtype) + ")");
  Tensor<S> t;
  t.dims.resize(rank);
  std::int64_t count = 1;
  for (int i = 0; i < rank; ++i) {
    in.read(reinterpret_cast<char*>(&t.dims[i]), 8);
    if (t.dims[i] < 0) fail(ErrorCode::io_error, context + ": negative dimension");
    count *= t.dims[i];
  }
  t.data.resize(static_cast<std::size_t>(count));
  in.read(reinterpret_cast<char*>(t.data.data()), count * static_cast<std::int64_t>(sizeof(S)));
  if (!in) fail(ErrorCode::io_error, context + ": truncated blob");
  return t;
}

}  // namespace gait::blob
