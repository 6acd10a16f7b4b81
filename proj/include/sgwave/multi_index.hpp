#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sgwave {

/// Total-degree multi-index set {alpha in N^dims : |alpha| <= degree},
/// graded-lexicographic order. Index 0 is the all-zero tuple, so mode 0
/// of any expansion built on it is the mean mode.
class MultiIndexSet {
public:
    MultiIndexSet() = default;

    MultiIndexSet(int dims, int degree) : dims_(dims), degree_(degree) {
        if (dims < 1) throw std::invalid_argument("MultiIndexSet: dims must be >= 1");
        if (degree < 0) throw std::invalid_argument("MultiIndexSet: degree must be >= 0");
        std::vector<int> alpha(dims, 0);
        for (int d = 0; d <= degree; ++d) emit(alpha, 0, d);
    }

    int dims() const { return dims_; }
    int total_degree() const { return degree_; }
    int size() const { return static_cast<int>(flat_.size() / dims_); }

    /// Pointer to the dims() components of index m.
    const int* operator[](int m) const { return flat_.data() + static_cast<std::size_t>(m) * dims_; }

private:
    void emit(std::vector<int>& alpha, int pos, int remaining) {
        if (pos == dims_ - 1) {
            alpha[pos] = remaining;
            flat_.insert(flat_.end(), alpha.begin(), alpha.end());
            return;
        }
        for (int a = 0; a <= remaining; ++a) {
            alpha[pos] = a;
            emit(alpha, pos + 1, remaining - a);
        }
        alpha[pos] = 0;
    }

    int dims_ = 0;
    int degree_ = 0;
    std::vector<int> flat_;
};

inline MultiIndexSet build_index_set(int dims, int degree) { return MultiIndexSet(dims, degree); }

/// binomial(n, k) in 64 bits; enough for every index set we build.
inline std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace sgwave
