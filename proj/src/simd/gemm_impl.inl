// Blocked GEMM driver shared by every kernel variant.
//
// Include inside a variant namespace after defining vector traits with:
//   using value_type; static constexpr int width;
//   reg zero(); reg load(const T*); void store(T*, reg); reg broadcast(T);
//   reg fmadd(reg a, reg b, reg c);  // a*b + c
//   reg add(reg, reg); reg mul(reg, reg);
// Each variant TU instantiates the templates with its own traits types, so
// the instantiations never collide across TUs compiled with different flags.
//
// Loop structure follows the usual five-loop blocking: NC columns of B, KC
// depth, MC rows of A, then MR x NR register tiles. Per element of C the
// k-accumulation order is fixed by the blocking, independent of threading.

// The including TU provides <algorithm>, <vector> and igkit/parallel.hpp.

namespace detail {

inline constexpr std::size_t kKc = 256;
inline constexpr std::size_t kMc = 96;
inline constexpr std::size_t kNc = 2048;

// Packs op(A)[i0:i0+mc, p0:p0+kc] into MR-row panels, k-major inside a panel.
template <class T, int MR>
void pack_a(Trans ta, const T* a, std::size_t lda, std::size_t i0, std::size_t mc, std::size_t p0,
            std::size_t kc, T* out) {
  for (std::size_t ir = 0; ir < mc; ir += MR) {
    const std::size_t rows = std::min<std::size_t>(MR, mc - ir);
    if (ta == Trans::No) {
      for (std::size_t p = 0; p < kc; ++p) {
        std::size_t i = 0;
        for (; i < rows; ++i) out[p * MR + i] = a[(i0 + ir + i) * lda + p0 + p];
        for (; i < static_cast<std::size_t>(MR); ++i) out[p * MR + i] = T(0);
      }
    } else {
      for (std::size_t p = 0; p < kc; ++p) {
        const T* src = a + (p0 + p) * lda + i0 + ir;
        std::size_t i = 0;
        for (; i < rows; ++i) out[p * MR + i] = src[i];
        for (; i < static_cast<std::size_t>(MR); ++i) out[p * MR + i] = T(0);
      }
    }
    out += kc * MR;
  }
}

// Packs op(B)[p0:p0+kc, j0:j0+nc] into NR-column panels.
template <class T, int NR>
void pack_b(Trans tb, const T* b, std::size_t ldb, std::size_t p0, std::size_t kc, std::size_t j0,
            std::size_t nc, T* out) {
  for (std::size_t jr = 0; jr < nc; jr += NR) {
    const std::size_t cols = std::min<std::size_t>(NR, nc - jr);
    if (tb == Trans::No) {
      for (std::size_t p = 0; p < kc; ++p) {
        const T* src = b + (p0 + p) * ldb + j0 + jr;
        std::size_t j = 0;
        for (; j < cols; ++j) out[p * NR + j] = src[j];
        for (; j < static_cast<std::size_t>(NR); ++j) out[p * NR + j] = T(0);
      }
    } else {
      for (std::size_t p = 0; p < kc; ++p) {
        std::size_t j = 0;
        for (; j < cols; ++j) out[p * NR + j] = b[(j0 + jr + j) * ldb + p0 + p];
        for (; j < static_cast<std::size_t>(NR); ++j) out[p * NR + j] = T(0);
      }
    }
    out += kc * NR;
  }
}

// c[0:rows, 0:cols] += alpha * (packed A panel) * (packed B panel)
template <class V, int MR, int NV>
void micro_kernel(std::size_t kc, const typename V::value_type* ap, const typename V::value_type* bp,
                  typename V::value_type alpha, typename V::value_type* c, std::size_t ldc, std::size_t rows,
                  std::size_t cols) {
  using T = typename V::value_type;
  constexpr int W = V::width;
  constexpr int NR = NV * W;
  typename V::reg acc[MR][NV];
#pragma GCC unroll 16
  for (int i = 0; i < MR; ++i)
#pragma GCC unroll 4
    for (int v = 0; v < NV; ++v) acc[i][v] = V::zero();

  for (std::size_t p = 0; p < kc; ++p) {
    typename V::reg bv[NV];
#pragma GCC unroll 4
    for (int v = 0; v < NV; ++v) bv[v] = V::load(bp + p * NR + v * W);
#pragma GCC unroll 16
    for (int i = 0; i < MR; ++i) {
      const typename V::reg av = V::broadcast(ap[p * MR + i]);
#pragma GCC unroll 4
      for (int v = 0; v < NV; ++v) acc[i][v] = V::fmadd(av, bv[v], acc[i][v]);
    }
  }

  const typename V::reg alpha_v = V::broadcast(alpha);
  if (rows == static_cast<std::size_t>(MR) && cols == static_cast<std::size_t>(NR)) {
#pragma GCC unroll 16
    for (int i = 0; i < MR; ++i)
#pragma GCC unroll 4
      for (int v = 0; v < NV; ++v) {
        T* dst = c + i * ldc + v * W;
        V::store(dst, V::add(V::load(dst), V::mul(alpha_v, acc[i][v])));
      }
    return;
  }
  alignas(64) T tile[MR * NR];
#pragma GCC unroll 16
  for (int i = 0; i < MR; ++i)
#pragma GCC unroll 4
    for (int v = 0; v < NV; ++v) V::store(tile + i * NR + v * W, V::mul(alpha_v, acc[i][v]));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) c[i * ldc + j] += tile[i * NR + j];
}

template <class V, int MR, int NV>
void gemm_serial(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, typename V::value_type alpha,
                 const typename V::value_type* a, std::size_t lda, const typename V::value_type* b,
                 std::size_t ldb, typename V::value_type* c, std::size_t ldc) {
  using T = typename V::value_type;
  constexpr std::size_t NR = static_cast<std::size_t>(NV * V::width);
  constexpr std::size_t MRs = MR;
  thread_local std::vector<T> a_pack, b_pack;
  a_pack.resize(((kMc + MRs - 1) / MRs) * MRs * kKc);
  b_pack.resize(((kNc + NR - 1) / NR) * NR * kKc);

  for (std::size_t jc = 0; jc < n; jc += kNc) {
    const std::size_t nc = std::min(kNc, n - jc);
    for (std::size_t pc = 0; pc < k; pc += kKc) {
      const std::size_t kc = std::min(kKc, k - pc);
      pack_b<T, static_cast<int>(NR)>(tb, b, ldb, pc, kc, jc, nc, b_pack.data());
      for (std::size_t ic = 0; ic < m; ic += kMc) {
        const std::size_t mc = std::min(kMc, m - ic);
        pack_a<T, MR>(ta, a, lda, ic, mc, pc, kc, a_pack.data());
        for (std::size_t jr = 0; jr < nc; jr += NR) {
          const std::size_t cols = std::min(NR, nc - jr);
          const T* bp = b_pack.data() + (jr / NR) * kc * NR;
          for (std::size_t ir = 0; ir < mc; ir += MRs) {
            const std::size_t rows = std::min(MRs, mc - ir);
            const T* ap = a_pack.data() + (ir / MRs) * kc * MRs;
            micro_kernel<V, MR, NV>(kc, ap, bp, alpha, c + (ic + ir) * ldc + jc + jr, ldc, rows, cols);
          }
        }
      }
    }
  }
}

template <class V, int MR, int NV>
void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, typename V::value_type alpha,
          const typename V::value_type* a, std::size_t lda, const typename V::value_type* b, std::size_t ldb,
          typename V::value_type beta, typename V::value_type* c, std::size_t ldc) {
  using T = typename V::value_type;
  if (m == 0 || n == 0) return;
  for (std::size_t i = 0; i < m; ++i) {
    T* row = c + i * ldc;
    if (beta == T(0)) {
      std::fill(row, row + n, T(0));
    } else if (beta != T(1)) {
      for (std::size_t j = 0; j < n; ++j) row[j] *= beta;
    }
  }
  if (k == 0 || alpha == T(0)) return;

  constexpr std::size_t NR = static_cast<std::size_t>(NV * V::width);
  // Column split across workers keeps every C element on one thread with an
  // unchanged accumulation order.
  const std::size_t panels = (n + NR - 1) / NR;
  const std::size_t min_panels = std::max<std::size_t>(1, (1u << 18) / std::max<std::size_t>(1, m * k * NR));
  igkit::parallel_for(panels, min_panels, [&](std::size_t p0, std::size_t p1) {
    const std::size_t j0 = p0 * NR, j1 = std::min(n, p1 * NR);
    const T* b_off = tb == Trans::No ? b + j0 : b + j0 * ldb;
    gemm_serial<V, MR, NV>(ta, tb, m, j1 - j0, k, alpha, a, lda, b_off, ldb, c + j0, ldc);
  });
}

}  // namespace detail
