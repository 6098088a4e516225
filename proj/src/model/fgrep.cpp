#include "igkit/fgrep.hpp"

#include "igkit/error.hpp"
#include "igkit/ops.hpp"

namespace igkit::fgrep {

namespace {

void check_kernel(const Tensor& k) {
  if (k.rank() != 4 || k.dim(2) != k.dim(3))
    throw DimensionError("FGRep needs a square spatial kernel, got " + shape_str(k.shape()));
}

}  // namespace

Tensor ensemble_form(const Tensor& m, const Tensor& k) {
  check_kernel(k);
  const int pad = ops::same_padding(k);
  Tensor acc;
  for (const auto t : ops::dihedral_group()) {
    const Tensor y = ops::apply_transform(t.inverse(), ops::conv2d(ops::apply_transform(t, m), k, pad));
    if (acc.empty())
      acc = y;
    else
      ops::axpy(1.0, y, acc);
  }
  return ops::scale(acc, 1.0 / 8.0);
}

Tensor augmented_kernel_form(const Tensor& m, const Tensor& k) {
  check_kernel(k);
  const int pad = ops::same_padding(k);
  Tensor acc;
  for (const auto t : ops::dihedral_group()) {
    const Tensor y = ops::conv2d(m, ops::apply_transform(t, k), pad);
    if (acc.empty())
      acc = y;
    else
      ops::axpy(1.0, y, acc);
  }
  return ops::scale(acc, 1.0 / 8.0);
}

Tensor reparameterize(const Tensor& k) {
  check_kernel(k);
  Tensor acc(k.shape());
  for (const auto t : ops::dihedral_group()) ops::axpy(1.0, ops::apply_transform(t, k), acc);
  return ops::scale(acc, 1.0 / 8.0);
}

ag::Var reparameterize(const ag::Var& k) {
  return ag::make_op(reparameterize(k.value()), {k},
                     [](const Tensor& g) { return std::vector<Tensor>{reparameterize(g)}; });
}

Tensor reparameterize_subpixel(const Tensor& k, int r) {
  check_kernel(k);
  const std::int64_t rr = static_cast<std::int64_t>(r) * r;
  if (r < 1 || k.dim(0) % rr != 0) throw DimensionError("output channels not divisible by r^2");
  const std::int64_t c = k.dim(0) / rr, ce = k.dim(1), ks = k.dim(2);
  // [C, r, r, C_e, k, k] -> sub-pixel axes last so both grids can be transformed.
  const Tensor sub_last = ops::permute(k.reshaped(Shape{c, r, r, ce, ks, ks}), {0, 3, 4, 5, 1, 2});
  Tensor acc(sub_last.shape());
  for (const auto t : ops::dihedral_group()) {
    Tensor y = ops::apply_transform(t, sub_last);               // sub-pixel grid
    y = ops::permute(y, {0, 4, 5, 1, 2, 3});                     // [C, r, r, C_e, k, k]
    y = ops::apply_transform(t, y);                              // spatial taps
    ops::axpy(1.0, ops::permute(y, {0, 3, 4, 5, 1, 2}), acc);
  }
  return ops::permute(ops::scale(acc, 1.0 / 8.0), {0, 4, 5, 1, 2, 3}).reshaped(k.shape());
}

}  // namespace igkit::fgrep
