#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

#include "unifact/errors.hpp"

namespace unifact {

/// Rectilinear sample grid in dimension 1 or 2, optionally periodic per axis.
/// Points are stored row-major over the axes.
class GridDomain {
public:
    GridDomain(std::vector<std::vector<double>> axes, std::vector<bool> periodic)
        : axes_(std::move(axes)), periodic_(std::move(periodic)) {
        if (axes_.empty() || axes_.size() > 2)
            throw BadInput("grid domain: dimension must be 1 or 2");
        if (periodic_.size() != axes_.size())
            throw BadInput("grid domain: periodic flag count mismatch");
        for (const auto& ax : axes_) {
            if (ax.size() < 2) throw BadInput("grid domain: need at least 2 samples per axis");
            for (std::size_t i = 1; i < ax.size(); ++i)
                if (!(ax[i] > ax[i - 1]))
                    throw BadInput("grid domain: axis coordinates must be strictly increasing");
        }
    }

    std::size_t dim() const { return axes_.size(); }
    const std::vector<std::vector<double>>& axes() const { return axes_; }
    bool periodic(std::size_t d) const { return periodic_[d]; }
    const std::vector<bool>& periodic_flags() const { return periodic_; }
    std::size_t axis_size(std::size_t d) const { return axes_[d].size(); }

    std::size_t size() const {
        std::size_t n = 1;
        for (const auto& ax : axes_) n *= ax.size();
        return n;
    }

    /// row-major index <-> per-axis multi-index
    std::array<std::size_t, 2> unravel(std::size_t idx) const {
        if (dim() == 1) return {idx, 0};
        const std::size_t n1 = axes_[1].size();
        return {idx / n1, idx % n1};
    }
    std::size_t ravel(std::size_t i0, std::size_t i1 = 0) const {
        if (dim() == 1) return i0;
        return i0 * axes_[1].size() + i1;
    }

    std::array<double, 2> coord(std::size_t idx) const {
        const auto mi = unravel(idx);
        if (dim() == 1) return {axes_[0][mi[0]], 0.0};
        return {axes_[0][mi[0]], axes_[1][mi[1]]};
    }

    static std::shared_ptr<const GridDomain> interval(double lo, double hi, std::size_t n) {
        std::vector<double> ax(n);
        for (std::size_t i = 0; i < n; ++i)
            ax[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        return std::make_shared<GridDomain>(std::vector<std::vector<double>>{ax},
                                            std::vector<bool>{false});
    }

    /// Uniform angles on [0, 2*pi), wrapping.
    static std::shared_ptr<const GridDomain> circle(std::size_t n) {
        std::vector<double> ax(n);
        for (std::size_t i = 0; i < n; ++i)
            ax[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        return std::make_shared<GridDomain>(std::vector<std::vector<double>>{ax},
                                            std::vector<bool>{true});
    }

    static std::shared_ptr<const GridDomain> square(double lo, double hi, std::size_t n) {
        std::vector<double> ax(n);
        for (std::size_t i = 0; i < n; ++i)
            ax[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        return std::make_shared<GridDomain>(std::vector<std::vector<double>>{ax, ax},
                                            std::vector<bool>{false, false});
    }

private:
    std::vector<std::vector<double>> axes_;
    std::vector<bool> periodic_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

inline bool same_domain(const DomainPtr& a, const DomainPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->dim() != b->dim()) return false;
    for (std::size_t d = 0; d < a->dim(); ++d) {
        if (a->axis_size(d) != b->axis_size(d) || a->periodic(d) != b->periodic(d)) return false;
        for (std::size_t i = 0; i < a->axis_size(d); ++i)
            if (a->axes()[d][i] != b->axes()[d][i]) return false;
    }
    return true;
}

inline void require_same_domain(const DomainPtr& a, const DomainPtr& b, const char* where) {
    if (!same_domain(a, b)) throw DomainMismatch(std::string(where) + ": domains differ");
}

constexpr std::size_t kInfDistance = std::numeric_limits<std::size_t>::max();

/// Subset of grid samples, stored as a mask. Dilation and distance use the
/// Chebyshev metric on the index lattice and honor periodic wrap.
struct Region {
    DomainPtr domain;
    std::vector<std::uint8_t> mask;

    Region() = default;
    explicit Region(DomainPtr dom, bool full = false)
        : domain(std::move(dom)), mask(domain->size(), full ? 1 : 0) {}

    bool contains(std::size_t idx) const { return mask[idx] != 0; }
    void insert(std::size_t idx) { mask[idx] = 1; }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto v : mask) c += v;
        return c;
    }
    bool empty() const { return count() == 0; }

    Region complement() const {
        Region r = *this;
        for (auto& v : r.mask) v = v ? 0 : 1;
        return r;
    }
    Region unite(const Region& o) const {
        require_same_domain(domain, o.domain, "region union");
        Region r = *this;
        for (std::size_t i = 0; i < mask.size(); ++i) r.mask[i] = (mask[i] | o.mask[i]) ? 1 : 0;
        return r;
    }
    Region intersect(const Region& o) const {
        require_same_domain(domain, o.domain, "region intersection");
        Region r = *this;
        for (std::size_t i = 0; i < mask.size(); ++i) r.mask[i] = (mask[i] & o.mask[i]) ? 1 : 0;
        return r;
    }
    Region subtract(const Region& o) const {
        require_same_domain(domain, o.domain, "region difference");
        Region r = *this;
        for (std::size_t i = 0; i < mask.size(); ++i) r.mask[i] = (mask[i] && !o.mask[i]) ? 1 : 0;
        return r;
    }
    bool is_subset_of(const Region& o) const {
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i] && !o.mask[i]) return false;
        return true;
    }
    bool intersects(const Region& o) const {
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i] && o.mask[i]) return true;
        return false;
    }

    /// Per-axis half-open index ranges; a range [lo, hi) with hi > axis size
    /// is not allowed.
    static Region from_ranges(const DomainPtr& dom, const std::vector<std::size_t>& lo,
                              const std::vector<std::size_t>& hi) {
        if (lo.size() != dom->dim() || hi.size() != dom->dim())
            throw BadInput("region ranges: dimension mismatch");
        for (std::size_t d = 0; d < dom->dim(); ++d)
            if (hi[d] > dom->axis_size(d) || lo[d] > hi[d])
                throw BadInput("region ranges: out of bounds");
        Region r(dom);
        if (dom->dim() == 1) {
            for (std::size_t i = lo[0]; i < hi[0]; ++i) r.insert(i);
        } else {
            for (std::size_t i = lo[0]; i < hi[0]; ++i)
                for (std::size_t j = lo[1]; j < hi[1]; ++j) r.insert(dom->ravel(i, j));
        }
        return r;
    }

    template <class Pred>
    static Region from_predicate(const DomainPtr& dom, Pred&& pred) {
        Region r(dom);
        for (std::size_t i = 0; i < dom->size(); ++i)
            if (pred(i)) r.insert(i);
        return r;
    }

    /// Chebyshev distance in cells to this set, multi-source BFS.
    /// Points of the set get 0; unreachable (empty set) gives kInfDistance.
    std::vector<std::size_t> distance_field() const {
        const std::size_t n = domain->size();
        std::vector<std::size_t> dist(n, kInfDistance);
        std::deque<std::size_t> queue;
        for (std::size_t i = 0; i < n; ++i)
            if (mask[i]) {
                dist[i] = 0;
                queue.push_back(i);
            }
        while (!queue.empty()) {
            const std::size_t cur = queue.front();
            queue.pop_front();
            for_each_neighbor(cur, [&](std::size_t nb) {
                if (dist[nb] == kInfDistance) {
                    dist[nb] = dist[cur] + 1;
                    queue.push_back(nb);
                }
            });
        }
        return dist;
    }

    Region dilate(std::size_t cells) const {
        const auto dist = distance_field();
        Region r(domain);
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (dist[i] != kInfDistance && dist[i] <= cells) r.insert(i);
        return r;
    }

    template <class Fn>
    void for_each_neighbor(std::size_t idx, Fn&& fn) const {
        const auto mi = domain->unravel(idx);
        const std::size_t d = domain->dim();
        auto step = [&](std::size_t axis, std::size_t i, long long off,
                        std::size_t& out) -> bool {
            const long long n = static_cast<long long>(domain->axis_size(axis));
            long long j = static_cast<long long>(i) + off;
            if (domain->periodic(axis)) {
                j = ((j % n) + n) % n;
            } else if (j < 0 || j >= n) {
                return false;
            }
            out = static_cast<std::size_t>(j);
            return true;
        };
        if (d == 1) {
            for (long long o0 : {-1LL, 1LL}) {
                std::size_t j0;
                if (step(0, mi[0], o0, j0)) fn(domain->ravel(j0));
            }
        } else {
            for (long long o0 : {-1LL, 0LL, 1LL})
                for (long long o1 : {-1LL, 0LL, 1LL}) {
                    if (o0 == 0 && o1 == 0) continue;
                    std::size_t j0, j1;
                    if (step(0, mi[0], o0, j0) && step(1, mi[1], o1, j1))
                        fn(domain->ravel(j0, j1));
                }
        }
    }
};

} // namespace unifact
