#include "hyperdg/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string>

namespace hyperdg {

namespace {

constexpr int chunk = 64;
constexpr int max_half = 16;

template <bool Accumulate>
inline void store(double* out, double v) {
  if constexpr (Accumulate)
    *out += v;
  else
    *out = v;
}

// One post-slab of a contraction: rows of length `pre` are contiguous.
template <bool Accumulate>
void contract_slab_dense(const Matrix1D& m, const double* in, double* out, std::size_t pre) {
  const DenseMatrix& M = m.dense();
  double acc[chunk];
  for (std::size_t s0 = 0; s0 < pre; s0 += chunk) {
    const int len = static_cast<int>(std::min<std::size_t>(chunk, pre - s0));
    for (int j = 0; j < M.rows; ++j) {
      for (int s = 0; s < len; ++s) acc[s] = 0.0;
      for (int i = 0; i < M.cols; ++i) {
        const double mji = M(j, i);
        const double* row = in + i * pre + s0;
        for (int s = 0; s < len; ++s) acc[s] += mji * row[s];
      }
      double* o = out + j * pre + s0;
      for (int s = 0; s < len; ++s) store<Accumulate>(o + s, acc[s]);
    }
  }
}

template <bool Accumulate>
void contract_slab_even_odd(const Matrix1D& m, const double* in, double* out, std::size_t pre) {
  const int n = m.rows();
  const int h = m.half();
  const bool odd_n = n % 2 == 1;
  const bool even = m.structure() == Matrix1D::Structure::even;
  const double* E = m.even_part().data();
  const double* O = m.odd_part().data();
  const double* mid = m.middle_column().data();

  double e[max_half][chunk], o[max_half][chunk];
  double se[chunk], so[chunk];
  for (std::size_t s0 = 0; s0 < pre; s0 += chunk) {
    const int len = static_cast<int>(std::min<std::size_t>(chunk, pre - s0));
    for (int j = 0; j < h; ++j) {
      const double* a = in + j * pre + s0;
      const double* b = in + (n - 1 - j) * pre + s0;
      for (int s = 0; s < len; ++s) {
        e[j][s] = 0.5 * (a[s] + b[s]);
        o[j][s] = 0.5 * (a[s] - b[s]);
      }
    }
    const double* centre = in + h * pre + s0;
    for (int q = 0; q < h; ++q) {
      for (int s = 0; s < len; ++s) se[s] = so[s] = 0.0;
      for (int j = 0; j < h; ++j) {
        const double ce = E[q * h + j], co = O[q * h + j];
        for (int s = 0; s < len; ++s) {
          se[s] += ce * e[j][s];
          so[s] += co * o[j][s];
        }
      }
      if (odd_n) {
        const double cm = mid[q];
        for (int s = 0; s < len; ++s) se[s] += cm * centre[s];
      }
      double* lo = out + q * pre + s0;
      double* hi = out + (n - 1 - q) * pre + s0;
      for (int s = 0; s < len; ++s) {
        store<Accumulate>(lo + s, se[s] + so[s]);
        store<Accumulate>(hi + s, even ? se[s] - so[s] : so[s] - se[s]);
      }
    }
    if (odd_n) {
      for (int s = 0; s < len; ++s) se[s] = 0.0;
      const double* coeffs = even ? E : O;
      for (int j = 0; j < h; ++j) {
        const double c = coeffs[h * h + j];
        for (int s = 0; s < len; ++s) se[s] += c * (even ? e[j][s] : o[j][s]);
      }
      if (even) {
        const double cm = mid[h];
        for (int s = 0; s < len; ++s) se[s] += cm * centre[s];
      }
      double* c = out + h * pre + s0;
      for (int s = 0; s < len; ++s) store<Accumulate>(c + s, se[s]);
    }
  }
}

// Small-stride path: one point at a time, with the extent known at compile time.
template <int N, bool Accumulate>
void contract_points_even_odd(const Matrix1D& m, const double* in, double* out, std::size_t pre,
                              std::size_t post) {
  constexpr int h = N / 2;
  const bool even = m.structure() == Matrix1D::Structure::even;
  const double* E = m.even_part().data();
  const double* O = m.odd_part().data();
  const double* mid = m.middle_column().data();
  for (std::size_t p = 0; p < post; ++p) {
    const double* ib = in + p * N * pre;
    double* ob = out + p * N * pre;
    for (std::size_t s = 0; s < pre; ++s) {
      double e[h > 0 ? h : 1], o[h > 0 ? h : 1];
      for (int j = 0; j < h; ++j) {
        const double a = ib[j * pre + s], b = ib[(N - 1 - j) * pre + s];
        e[j] = 0.5 * (a + b);
        o[j] = 0.5 * (a - b);
      }
      const double centre = N % 2 == 1 ? ib[h * pre + s] : 0.0;
      for (int q = 0; q < h; ++q) {
        double se = 0.0, so = 0.0;
        for (int j = 0; j < h; ++j) {
          se += E[q * h + j] * e[j];
          so += O[q * h + j] * o[j];
        }
        if constexpr (N % 2 == 1) se += mid[q] * centre;
        store<Accumulate>(ob + q * pre + s, se + so);
        store<Accumulate>(ob + (N - 1 - q) * pre + s, even ? se - so : so - se);
      }
      if constexpr (N % 2 == 1) {
        const double* coeffs = even ? E : O;
        double se = 0.0;
        for (int j = 0; j < h; ++j) se += coeffs[h * h + j] * (even ? e[j] : o[j]);
        if (even) se += mid[h] * centre;
        store<Accumulate>(ob + h * pre + s, se);
      }
    }
  }
}

template <bool Accumulate>
bool contract_points_dispatch(const Matrix1D& m, const double* in, double* out, std::size_t pre,
                              std::size_t post) {
  switch (m.rows()) {
    case 2: contract_points_even_odd<2, Accumulate>(m, in, out, pre, post); return true;
    case 3: contract_points_even_odd<3, Accumulate>(m, in, out, pre, post); return true;
    case 4: contract_points_even_odd<4, Accumulate>(m, in, out, pre, post); return true;
    case 5: contract_points_even_odd<5, Accumulate>(m, in, out, pre, post); return true;
    case 6: contract_points_even_odd<6, Accumulate>(m, in, out, pre, post); return true;
    case 7: contract_points_even_odd<7, Accumulate>(m, in, out, pre, post); return true;
    case 8: contract_points_even_odd<8, Accumulate>(m, in, out, pre, post); return true;
    case 9: contract_points_even_odd<9, Accumulate>(m, in, out, pre, post); return true;
    case 10: contract_points_even_odd<10, Accumulate>(m, in, out, pre, post); return true;
    default: return false;
  }
}

constexpr std::size_t small_pre = 8;

template <bool Accumulate>
void contract_points_dense(const Matrix1D& m, const double* in, double* out, std::size_t pre, std::size_t post) {
  const DenseMatrix& M = m.dense();
  const int rows = M.rows, cols = M.cols;
  for (std::size_t p = 0; p < post; ++p) {
    const double* ib = in + p * cols * pre;
    double* ob = out + p * rows * pre;
    for (std::size_t s = 0; s < pre; ++s)
      for (int j = 0; j < rows; ++j) {
        const double* mj = M.data.data() + static_cast<std::size_t>(j) * cols;
        double acc = 0.0;
        for (int i = 0; i < cols; ++i) acc += mj[i] * ib[i * pre + s];
        store<Accumulate>(ob + j * pre + s, acc);
      }
  }
}


}  // namespace

TensorShape TensorShape::uniform(int rank, int n) {
  TensorShape s;
  s.rank = rank;
  for (int a = 0; a < rank; ++a) s.extents[a] = n;
  return s;
}

std::size_t TensorShape::size() const {
  std::size_t n = 1;
  for (int a = 0; a < rank; ++a) n *= static_cast<std::size_t>(extents[a]);
  return n;
}

TensorShape TensorShape::with_extent(int dim, int n) const {
  TensorShape s = *this;
  s.extents[dim] = n;
  return s;
}

TensorShape TensorShape::without(int dim) const {
  TensorShape s;
  s.rank = rank - 1;
  for (int a = 0, b = 0; a < rank; ++a)
    if (a != dim) s.extents[b++] = extents[a];
  return s;
}

bool valid_v_len(int v_len) { return v_len == 1 || v_len == 2 || v_len == 4 || v_len == 8; }

void contract_dim(const Matrix1D& m, int dim, const TensorShape& in_shape, int v_len,
                  std::span<const double> in, std::span<double> out, OpCounters& counters,
                  bool accumulate) {
  if (dim < 0 || dim >= in_shape.rank)
    throw std::invalid_argument("contraction axis out of range");
  if (in_shape.extents[dim] != m.cols())
    throw std::invalid_argument("extent mismatch along axis " + std::to_string(dim) + ": " +
                                std::to_string(in_shape.extents[dim]) + " vs matrix with " +
                                std::to_string(m.cols()) + " columns");
  const TensorShape out_shape = in_shape.with_extent(dim, m.rows());
  const std::size_t lanes = static_cast<std::size_t>(v_len);
  if (in.size() < in_shape.size() * lanes || out.size() < out_shape.size() * lanes)
    throw std::invalid_argument("buffer too small for contraction");

  std::size_t pre = lanes, post = 1;
  for (int a = 0; a < dim; ++a) pre *= in_shape.extents[a];
  for (int a = dim + 1; a < in_shape.rank; ++a) post *= in_shape.extents[a];

  const bool eo = m.structure() != Matrix1D::Structure::dense;
  bool done = eo && pre < small_pre &&
                    (accumulate ? contract_points_dispatch<true>(m, in.data(), out.data(), pre, post)
                                : contract_points_dispatch<false>(m, in.data(), out.data(), pre, post));
  if (!done && !eo && pre < small_pre) {
    accumulate ? contract_points_dense<true>(m, in.data(), out.data(), pre, post)
               : contract_points_dense<false>(m, in.data(), out.data(), pre, post);
    done = true;
  }
  for (std::size_t p = 0; p < (done ? 0 : post); ++p) {
    const double* ib = in.data() + p * m.cols() * pre;
    double* ob = out.data() + p * m.rows() * pre;
    if (eo) {
      accumulate ? contract_slab_even_odd<true>(m, ib, ob, pre)
                 : contract_slab_even_odd<false>(m, ib, ob, pre);
    } else {
      accumulate ? contract_slab_dense<true>(m, ib, ob, pre)
                 : contract_slab_dense<false>(m, ib, ob, pre);
    }
  }

  const std::uint64_t applies = post * pre;
  counters.flops += m.flops_per_apply() * applies;
  if (accumulate) counters.flops += out_shape.size() * lanes;
  counters.contraction_sweeps += 1;
  counters.data_sweeps += accumulate ? 3 : 2;
  if (!eo && m.rows() == m.cols() && m.rows() > 1) counters.dense_fallbacks += 1;
}

std::size_t kernel_scratch_size(const Basis1D& basis, int dim_x, int dim_v, int v_len) {
  const int d = dim_x + dim_v;
  const std::size_t cell = static_cast<std::size_t>(
      checked_pow(std::max(basis.n_dofs_1d(), basis.n_q()), d));
  return cell * static_cast<std::size_t>(v_len) * (std::max(dim_x, dim_v) + 1);
}

void apply_all_dims(const Matrix1D& m, int rank, int n, int v_len, std::span<const double> in,
                    std::span<double> out, std::span<double> scratch, OpCounters& counters) {
  const TensorShape shape = TensorShape::uniform(rank, n);
  const std::size_t len = shape.size() * v_len;
  if (m.is_identity() || rank == 0) {
    if (out.data() != in.data()) std::copy_n(in.begin(), len, out.begin());
    return;
  }
  // ping-pong so that the last sweep lands in out
  std::span<double> a = out.first(len), b = scratch.first(len);
  std::span<double> first = (rank % 2 == 1) ? a : b;
  contract_dim(m, 0, shape, v_len, in.first(len), first, counters);
  std::span<double> cur = first, other = (first.data() == a.data()) ? b : a;
  for (int dim = 1; dim < rank; ++dim) {
    contract_dim(m, dim, shape, v_len, cur, other, counters);
    std::swap(cur, other);
  }
}

void interpolate_to_quadrature(const Basis1D& basis, int dim, int v_len,
                               std::span<const double> nodal, std::span<double> quad,
                               std::span<double> scratch, OpCounters& counters) {
  apply_all_dims(basis.interp, dim, basis.n_q(), v_len, nodal, quad, scratch, counters);
}

void test_gradient_collocation(const Basis1D& basis, int dim, int v_len,
                               std::span<const std::span<const double>> flux,
                               std::span<double> out, std::span<double> /*scratch*/,
                               OpCounters& counters, bool accumulate) {
  if (static_cast<int>(flux.size()) != dim)
    throw std::invalid_argument("one flux component per direction required");
  const TensorShape shape = TensorShape::uniform(dim, basis.n_q());
  for (int j = 0; j < dim; ++j)
    contract_dim(basis.derivative_t, j, shape, v_len, flux[j], out, counters, accumulate || j > 0);
}

void integrate_test_gradient(const Basis1D& basis, int dim, int v_len,
                             std::span<const std::span<const double>> flux,
                             std::span<double> nodal, std::span<double> scratch,
                             OpCounters& counters) {
  const std::size_t len = TensorShape::uniform(dim, basis.n_q()).size() * v_len;
  std::span<double> co = scratch.first(len);
  test_gradient_collocation(basis, dim, v_len, flux, co, {}, counters);
  apply_all_dims(basis.interp_t, dim, basis.n_q(), v_len, co, nodal, scratch.subspan(len),
                 counters);
}

void interpolate_to_face(const Basis1D& basis, int dim, int face, int v_len,
                         std::span<const double> quad, std::span<double> face_values,
                         OpCounters& counters) {
  if (face < 0 || face >= 2 * dim) throw std::invalid_argument("invalid face id");
  const TensorShape shape = TensorShape::uniform(dim, basis.n_q());
  contract_dim(basis.face_eval[face % 2], face / 2, shape, v_len, quad, face_values, counters);
}

std::vector<int> face_dof_indices(int dim, int n_1d, int face) {
  if (face < 0 || face >= 2 * dim) throw std::invalid_argument("invalid face id");
  const int axis = face / 2;
  const int fixed = (face % 2 == 0) ? 0 : n_1d - 1;
  const TensorShape cell = TensorShape::uniform(dim, n_1d);
  const TensorShape f = cell.without(axis);
  std::vector<int> idx(f.size());
  int stride = 1;
  for (int a = 0; a < axis; ++a) stride *= n_1d;
  for (std::size_t p = 0; p < idx.size(); ++p) {
    // split p into (below axis, above axis) parts
    const std::size_t below = p % stride;
    const std::size_t above = p / stride;
    idx[p] = static_cast<int>(below + stride * (fixed + static_cast<std::size_t>(n_1d) * above));
  }
  return idx;
}

}  // namespace hyperdg
