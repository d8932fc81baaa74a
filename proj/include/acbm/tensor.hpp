#pragma once
// Dense tensors indexed over a (2n+1)-frame: storage, metric inversion,
// raising/lowering through contraction, and endomorphism application.
//
// Dimensions stay tiny (dim <= 9), so everything is dense row-major and
// loops are written out directly. Index order convention: F(X,Y,Z) is
// stored at F(x,y,z) and R_{ijkl} at R(i,j,k,l). A (1,1) endomorphism phi
// stores phi(k,i) = component k of phi(E_i).

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "acbm/base.hpp"

namespace acbm {

enum class Variance : std::uint8_t { Co, Contra };

template <class T>
class FrameTensor {
 public:
  FrameTensor() = default;
  FrameTensor(int dim, std::vector<Variance> slots)
      : dim_(dim), slots_(std::move(slots)) {
    std::size_t n = 1;
    for (std::size_t r = 0; r < slots_.size(); ++r) n *= dim_;
    data_.assign(n, T(0));
  }

  static FrameTensor matrix(int dim, Variance a, Variance b) {
    return FrameTensor(dim, {a, b});
  }

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(slots_.size()); }
  const std::vector<Variance>& slots() const { return slots_; }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  template <class... I>
  T& operator()(I... idx) {
    return data_[flat(idx...)];
  }
  template <class... I>
  const T& operator()(I... idx) const {
    return data_[flat(idx...)];
  }

  T& at(std::span<const int> idx) { return data_[flat_span(idx)]; }
  const T& at(std::span<const int> idx) const { return data_[flat_span(idx)]; }

  bool operator==(const FrameTensor& o) const {
    return dim_ == o.dim_ && slots_ == o.slots_ && data_ == o.data_;
  }

 private:
  template <class... I>
  std::size_t flat(I... idx) const {
    std::size_t f = 0;
    ((f = f * dim_ + static_cast<std::size_t>(idx)), ...);
    return f;
  }
  std::size_t flat_span(std::span<const int> idx) const {
    std::size_t f = 0;
    for (int v : idx) f = f * dim_ + static_cast<std::size_t>(v);
    return f;
  }

  int dim_ = 0;
  std::vector<Variance> slots_;
  std::vector<T> data_;
};

// Visits all rank-length multi-indices in row-major order.
template <class Fn>
void for_each_index(int dim, int rank, Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(std::max(rank, 1)), 0);
  if (rank == 0) {
    fn(std::span<const int>(idx.data(), 0));
    return;
  }
  for (;;) {
    fn(std::span<const int>(idx.data(), static_cast<std::size_t>(rank)));
    int p = rank - 1;
    while (p >= 0 && ++idx[p] == dim) idx[p--] = 0;
    if (p < 0) break;
  }
}

template <class To, class From>
FrameTensor<To> tensor_cast(const FrameTensor<From>& t) {
  FrameTensor<To> out(t.dim(), t.slots());
  for (std::size_t i = 0; i < t.data().size(); ++i)
    out.data()[i] = static_cast<To>(to_double(t.data()[i]));
  return out;
}

inline FrameTensor<double> to_double_tensor(const FrameTensor<Rational>& t) {
  FrameTensor<double> out(t.dim(), t.slots());
  for (std::size_t i = 0; i < t.data().size(); ++i)
    out.data()[i] = to_double(t.data()[i]);
  return out;
}
inline const FrameTensor<double>& to_double_tensor(
    const FrameTensor<double>& t) {
  return t;
}

template <class T>
double max_abs(const FrameTensor<T>& t) {
  double m = 0;
  for (const auto& v : t.data()) m = std::max(m, abs_as_double(v));
  return m;
}

template <class T>
double max_abs_diff(const FrameTensor<T>& a, const FrameTensor<T>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, abs_as_double(a.data()[i] - b.data()[i]));
  return m;
}

template <class T>
bool is_zero_tensor(const FrameTensor<T>& t, double tol) {
  for (const auto& v : t.data())
    if (!scalar_is_zero(v, tol)) return false;
  return true;
}

template <class T>
bool symmetric_in(const FrameTensor<T>& t, int a, int b, double tol) {
  bool sym = true;
  std::vector<int> swapped(static_cast<std::size_t>(t.rank()));
  for_each_index(t.dim(), t.rank(), [&](std::span<const int> idx) {
    std::copy(idx.begin(), idx.end(), swapped.begin());
    std::swap(swapped[a], swapped[b]);
    if (!scalar_is_zero(t.at(idx) - t.at(swapped), tol)) sym = false;
  });
  return sym;
}

// ---------------------------------------------------------------------------
// Rank-2 linear algebra

namespace detail {

template <class T>
int pick_pivot(const std::vector<std::vector<T>>& m, int col, int from) {
  const int n = static_cast<int>(m.size());
  if constexpr (std::is_same_v<T, double>) {
    int best = -1;
    double mag = 0;
    for (int r = from; r < n; ++r) {
      const double a = std::fabs(m[r][col]);
      if (a > mag) {
        mag = a;
        best = r;
      }
    }
    return best;
  } else {
    for (int r = from; r < n; ++r)
      if (m[r][col] != 0) return r;
    return -1;
  }
}

}  // namespace detail

// Gauss-Jordan inverse of a rank-2 tensor. Exact over rationals.
template <class T>
FrameTensor<T> invert(const FrameTensor<T>& m, Variance out_a, Variance out_b) {
  if (m.rank() != 2) throw SlotError("invert: expected a rank-2 tensor");
  const int n = m.dim();
  std::vector<std::vector<T>> a(n, std::vector<T>(n)),
      inv(n, std::vector<T>(n, T(0)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i][j] = m(i, j);
    inv[i][i] = T(1);
  }
  for (int col = 0; col < n; ++col) {
    const int piv = detail::pick_pivot(a, col, col);
    if (piv < 0 || scalar_is_zero(a[piv][col], 0.0))
      throw SingularMatrixError("matrix is singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const T d = a[col][col];
    for (int j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const T f = a[r][col];
      if (scalar_is_zero(f, 0.0)) continue;
      for (int j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  FrameTensor<T> out(n, {out_a, out_b});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = inv[i][j];
  return out;
}

// Signature (positive, negative, zero) of a symmetric rank-2 tensor by
// congruence diagonalization (Sylvester).
template <class T>
struct Signature {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};

template <class T>
Signature<T> signature_of_symmetric(const FrameTensor<T>& g, double tol) {
  const int n = g.dim();
  std::vector<std::vector<T>> m(n, std::vector<T>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = g(i, j);

  auto add_rowcol = [&](int dst, int src) {
    for (int j = 0; j < n; ++j) m[dst][j] += m[src][j];
    for (int i = 0; i < n; ++i) m[i][dst] += m[i][src];
  };
  auto swap_rowcol = [&](int a, int b) {
    std::swap(m[a], m[b]);
    for (int i = 0; i < n; ++i) std::swap(m[i][a], m[i][b]);
  };

  Signature<T> sig;
  for (int k = 0; k < n; ++k) {
    if (scalar_is_zero(m[k][k], tol)) {
      int l = -1;
      for (int r = k + 1; r < n; ++r)
        if (!scalar_is_zero(m[r][r], tol)) {
          l = r;
          break;
        }
      if (l >= 0) {
        swap_rowcol(k, l);
      } else {
        for (int r = k + 1; r < n && l < 0; ++r)
          if (!scalar_is_zero(m[k][r], tol)) l = r;
        if (l < 0) {
          ++sig.zero;
          continue;
        }
        add_rowcol(k, l);
      }
    }
    const T d = m[k][k];
    for (int r = k + 1; r < n; ++r) {
      if (scalar_is_zero(m[r][k], tol)) continue;
      const T f = m[r][k] / d;
      for (int j = 0; j < n; ++j) m[r][j] -= f * m[k][j];
      for (int i = 0; i < n; ++i) m[i][r] -= f * m[i][k];
    }
    if (scalar_is_zero(d, tol))
      ++sig.zero;
    else if (to_double(d) > 0)
      ++sig.positive;
    else
      ++sig.negative;
  }
  return sig;
}

// ---------------------------------------------------------------------------
// Metric pair

template <class T>
struct MetricPair {
  FrameTensor<T> g;      // (0,2) symmetric nondegenerate
  FrameTensor<T> g_inv;  // (2,0)
};

template <class T>
FrameTensor<T> invert_metric(const FrameTensor<T>& g) {
  if (g.rank() != 2 || g.slots()[0] != Variance::Co ||
      g.slots()[1] != Variance::Co)
    throw SlotError("invert_metric: expected a (0,2) tensor");
  try {
    return invert(g, Variance::Contra, Variance::Contra);
  } catch (const SingularMatrixError&) {
    throw SingularMatrixError("metric is singular");
  }
}

template <class T>
MetricPair<T> make_metric_pair(FrameTensor<T> g) {
  MetricPair<T> mp;
  mp.g_inv = invert_metric(g);
  mp.g = std::move(g);
  return mp;
}

// ---------------------------------------------------------------------------
// Contraction and endomorphism application

// Metric contraction of two covariant slots: valence drops by (2,0).
template <class T>
FrameTensor<T> contract(const FrameTensor<T>& t, const FrameTensor<T>& g_inv,
                        int slot_a, int slot_b) {
  const int rank = t.rank();
  if (slot_a == slot_b || slot_a < 0 || slot_b < 0 || slot_a >= rank ||
      slot_b >= rank)
    throw SlotError("contract: slot out of range");
  if (t.slots()[slot_a] != Variance::Co || t.slots()[slot_b] != Variance::Co)
    throw SlotError("contract: both slots must be covariant");
  if (slot_a > slot_b) std::swap(slot_a, slot_b);

  const int dim = t.dim();
  std::vector<Variance> out_slots;
  for (int s = 0; s < rank; ++s)
    if (s != slot_a && s != slot_b) out_slots.push_back(t.slots()[s]);
  FrameTensor<T> out(dim, out_slots);

  std::vector<int> full(static_cast<std::size_t>(rank));
  for_each_index(dim, rank - 2, [&](std::span<const int> j) {
    std::size_t src = 0;
    for (int s = 0; s < rank; ++s)
      if (s != slot_a && s != slot_b) full[s] = j[src++];
    T acc(0);
    for (int p = 0; p < dim; ++p) {
      full[slot_a] = p;
      for (int q = 0; q < dim; ++q) {
        full[slot_b] = q;
        acc += g_inv(p, q) * t.at(full);
      }
    }
    out.at(j) = acc;
  });
  return out;
}

// Composes a covariant slot with an endomorphism:
// t'(... i ...) = sum_j t(... j ...) phi(j, i).
template <class T>
FrameTensor<T> apply_endomorphism(const FrameTensor<T>& t,
                                  const FrameTensor<T>& phi, int slot) {
  if (slot < 0 || slot >= t.rank()) throw SlotError("slot out of range");
  if (t.slots()[slot] != Variance::Co)
    throw SlotError("apply_endomorphism: slot must be covariant");
  const int dim = t.dim();
  FrameTensor<T> out(dim, t.slots());
  std::vector<int> src(static_cast<std::size_t>(t.rank()));
  for_each_index(dim, t.rank(), [&](std::span<const int> idx) {
    std::copy(idx.begin(), idx.end(), src.begin());
    T acc(0);
    for (int j = 0; j < dim; ++j) {
      src[slot] = j;
      acc += t.at(src) * phi(j, idx[slot]);
    }
    out.at(idx) = acc;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Vector / covector algebra against rank-2 tensors

template <class T>
FrameVec<T> apply_matrix(const FrameTensor<T>& phi, const FrameVec<T>& v) {
  const int dim = phi.dim();
  FrameVec<T> out(dim, T(0));
  for (int k = 0; k < dim; ++k)
    for (int i = 0; i < dim; ++i) out[k] += phi(k, i) * v[i];
  return out;
}

// c∘phi, components (c∘phi)_i = c_m phi(m,i)
template <class T>
Covector<T> compose(const Covector<T>& c, const FrameTensor<T>& phi) {
  const int dim = phi.dim();
  Covector<T> out(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    T acc(0);
    for (int m = 0; m < dim; ++m) acc += c[m] * phi(m, i);
    out[i] = acc;
  }
  return out;
}

template <class T>
T metric_pairing(const FrameTensor<T>& g, const FrameVec<T>& x,
                 const FrameVec<T>& y) {
  T acc(0);
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j) acc += g(i, j) * x[i] * y[j];
  return acc;
}

template <class T>
FrameTensor<T> outer_covector(const Covector<T>& a, const Covector<T>& b) {
  const int dim = static_cast<int>(a.size());
  FrameTensor<T> out(dim, {Variance::Co, Variance::Co});
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) out(i, j) = a[i] * b[j];
  return out;
}

}  // namespace acbm
