#include <array>

#include "igkit/error.hpp"
#include "igkit/ops.hpp"

namespace igkit::ops {

namespace {

// Multiplication table found by acting on an asymmetric probe.
struct GroupTable {
  std::array<std::array<int, 8>, 8> compose{};
  std::array<int, 8> inverse{};

  GroupTable() {
    Tensor probe(Shape{3, 3});
    for (std::size_t i = 0; i < 9; ++i) probe[i] = static_cast<double>(i);
    std::array<Tensor, 8> images;
    for (int t = 0; t < 8; ++t) images[t] = apply_transform(Dihedral{t}, probe);
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b) {
        const Tensor ab = apply_transform(Dihedral{a}, images[b]);
        for (int t = 0; t < 8; ++t)
          if (images[t] == ab) compose[a][b] = t;
      }
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b)
        if (compose[a][b] == 0) inverse[a] = b;
  }
};

const GroupTable& table() {
  static const GroupTable t;
  return t;
}

}  // namespace

Dihedral Dihedral::inverse() const { return Dihedral{table().inverse[id]}; }

Dihedral compose(Dihedral a, Dihedral b) { return Dihedral{table().compose[a.id][b.id]}; }

std::vector<Dihedral> dihedral_group() {
  std::vector<Dihedral> g;
  for (int i = 0; i < 8; ++i) g.push_back(Dihedral{i});
  return g;
}

Tensor apply_transform(Dihedral t, const Tensor& x) {
  if (t.id < 0 || t.id >= 8) throw ContractError("dihedral transform id must be in [0, 8)");
  if (x.rank() < 2) throw DimensionError("apply_transform needs two spatial axes");
  const std::size_t r = x.rank();
  const std::int64_t h = x.dim(r - 2), w = x.dim(r - 1);
  const std::int64_t planes = static_cast<std::int64_t>(x.numel()) / (h * w);
  const int rot = t.rotation();
  const bool swap = rot % 2 == 1;
  Shape out_shape = x.shape();
  if (swap) std::swap(out_shape[r - 2], out_shape[r - 1]);
  const std::int64_t oh = out_shape[r - 2], ow = out_shape[r - 1];
  Tensor out(out_shape);
  for (std::int64_t p = 0; p < planes; ++p) {
    const double* src = x.ptr() + p * h * w;
    double* dst = out.ptr() + p * h * w;
    for (std::int64_t i = 0; i < oh; ++i)
      for (std::int64_t j = 0; j < ow; ++j) {
        // Undo the counter-clockwise rotation to find the flipped-plane index.
        std::int64_t si, sj;
        switch (rot) {
          case 0: si = i, sj = j; break;
          case 1: si = j, sj = w - 1 - i; break;
          case 2: si = h - 1 - i, sj = w - 1 - j; break;
          default: si = h - 1 - j, sj = i; break;
        }
        if (t.flipped()) sj = w - 1 - sj;
        dst[i * ow + j] = src[si * w + sj];
      }
  }
  return out;
}

}  // namespace igkit::ops
