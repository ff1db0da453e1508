#include "spinbeat/cce.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace spinbeat {

namespace {

struct ClusterHash {
    std::size_t operator()(const Cluster& c) const {
        std::size_t h = 1469598103934665603ull;
        for (std::size_t v : c) h = (h ^ v) * 1099511628211ull;
        return h;
    }
};

using ClusterIndex = std::unordered_map<Cluster, std::size_t, ClusterHash>;

using Adjacency = std::vector<std::vector<bool>>;

Adjacency proximity_graph(const BathRealization& r, double cutoff) {
    const std::size_t n = r.size();
    Adjacency adj(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if ((r.positions[i] - r.positions[j]).norm() <= cutoff) adj[i][j] = adj[j][i] = true;
        }
    }
    return adj;
}

bool connected(const Cluster& c, const Adjacency& adj) {
    if (c.size() <= 1) return true;
    std::vector<bool> seen(c.size(), false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        const std::size_t k = stack.back();
        stack.pop_back();
        for (std::size_t l = 0; l < c.size(); ++l) {
            if (!seen[l] && adj[c[k]][c[l]]) {
                seen[l] = true;
                ++count;
                stack.push_back(l);
            }
        }
    }
    return count == c.size();
}

ClusterIndex index_of(const ClusterSet& set) {
    ClusterIndex index;
    index.reserve(set.clusters.size());
    for (std::size_t k = 0; k < set.clusters.size(); ++k) index.emplace(set.clusters[k], k);
    return index;
}

/// Proper non-empty subsets of `c`, each sorted.
template <typename F>
void for_each_proper_subset(const Cluster& c, F&& f) {
    const std::size_t n = c.size();
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    Cluster sub;
    for (std::uint64_t mask = 1; mask < full; ++mask) {
        sub.clear();
        for (std::size_t k = 0; k < n; ++k) {
            if (mask & (std::uint64_t{1} << k)) sub.push_back(c[k]);
        }
        f(sub);
    }
}

/// Adds coef * (C(t) - C(0)) of `lines` into re/im. The rotor for each line
/// is re-seeded from cos/sin every kReseed samples to bound phase drift.
void accumulate_lines(const TransitionLines& lines, double coef, const TimeGrid& grid,
                      std::span<double> re, std::span<double> im) {
    constexpr std::size_t kReseed = 64;
    const std::size_t K = lines.omega.size();
    if (K == 0 || coef == 0.0) return;
    const std::size_t T = grid.samples;
    const double dt = grid.step();

    std::vector<double> ws(K), wa(K), zr(K), zi(K), rr(K), ri(K);
    for (std::size_t k = 0; k < K; ++k) {
        ws[k] = coef * lines.sym[k];
        wa[k] = coef * lines.asym[k];
        rr[k] = std::cos(lines.omega[k] * dt);
        ri[k] = std::sin(lines.omega[k] * dt);
    }
    // Same summation order as the sample loop, so the t = 0 sample is exactly zero.
    double st[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t m = 0;
    for (; m + 4 <= K; m += 4) {
        for (std::size_t u = 0; u < 4; ++u) st[u] += ws[m + u];
    }
    for (; m < K; ++m) st[0] += ws[m];
    const double sym_total = (st[0] + st[1]) + (st[2] + st[3]);
    for (std::size_t start = 0; start < T; start += kReseed) {
        const double t0 = grid.at(start);
        for (std::size_t k = 0; k < K; ++k) {
            zr[k] = std::cos(lines.omega[k] * t0);
            zi[k] = std::sin(lines.omega[k] * t0);
        }
        const std::size_t stop = std::min(T, start + kReseed);
        for (std::size_t j = start; j < stop; ++j) {
            double sr[4] = {0.0, 0.0, 0.0, 0.0};
            double si[4] = {0.0, 0.0, 0.0, 0.0};
            std::size_t k = 0;
            for (; k + 4 <= K; k += 4) {
                for (std::size_t u = 0; u < 4; ++u) {
                    sr[u] += ws[k + u] * zr[k + u];
                    si[u] += wa[k + u] * zi[k + u];
                }
            }
            for (; k < K; ++k) {
                sr[0] += ws[k] * zr[k];
                si[0] += wa[k] * zi[k];
            }
            re[j] += ((sr[0] + sr[1]) + (sr[2] + sr[3])) - sym_total;
            im[j] += (si[0] + si[1]) + (si[2] + si[3]);
            for (std::size_t q = 0; q < K; ++q) {
                const double nr = zr[q] * rr[q] - zi[q] * ri[q];
                zi[q] = zr[q] * ri[q] + zi[q] * rr[q];
                zr[q] = nr;
            }
        }
    }
}

CorrelationSeries make_series(const BathRealization& r, const TimeGrid& grid, int order,
                              const TermMask& mask) {
    CorrelationSeries s;
    s.grid = grid;
    s.A_bar = r.A_bar;
    s.order = order;
    s.mask = mask;
    s.spins = r.size();
    s.dynamic.assign(grid.samples, 0.0);
    return s;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

void TimeGrid::validate() const {
    if (samples < 2) throw Error("time grid needs at least 2 samples");
    if (!(t_max > 0.0)) throw Error("time grid t_max must be positive");
}

std::size_t ClusterSet::count_of_size(std::size_t size) const {
    return static_cast<std::size_t>(std::count_if(
        clusters.begin(), clusters.end(), [&](const Cluster& c) { return c.size() == size; }));
}

std::optional<std::size_t> ClusterSet::find(const Cluster& cluster) const {
    Cluster key = cluster;
    std::sort(key.begin(), key.end());
    const auto it = std::lower_bound(clusters.begin(), clusters.end(), key,
                                     [](const Cluster& a, const Cluster& b) {
                                         if (a.size() != b.size()) return a.size() < b.size();
                                         return a < b;
                                     });
    if (it != clusters.end() && *it == key) return static_cast<std::size_t>(it - clusters.begin());
    // The set may have been edited out of order.
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        if (clusters[k] == key) return k;
    }
    return std::nullopt;
}

ClusterSet enumerate_clusters(const BathRealization& realization, double cutoff, int max_order) {
    if (max_order < 1) throw Error("CCE order must be at least 1");
    const std::size_t n = realization.size();
    if (n == 0) throw Error("no spinful sites");
    if (!(cutoff >= 0.0)) throw Error("cutoff radius must be non-negative");
    const std::size_t order = std::min<std::size_t>(static_cast<std::size_t>(max_order), n);

    ClusterSet set;
    set.max_order = static_cast<int>(order);
    set.cutoff = cutoff;

    std::vector<std::vector<std::size_t>> neighbours(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && (realization.positions[i] - realization.positions[j]).norm() <= cutoff) {
                neighbours[i].push_back(j);
            }
        }
    }

    std::vector<Cluster> layer;
    for (std::size_t i = 0; i < n; ++i) layer.push_back({i});
    set.clusters = layer;
    for (std::size_t size = 2; size <= order; ++size) {
        std::vector<Cluster> next;
        for (const Cluster& c : layer) {
            for (std::size_t member : c) {
                for (std::size_t nb : neighbours[member]) {
                    if (std::binary_search(c.begin(), c.end(), nb)) continue;
                    Cluster grown = c;
                    grown.insert(std::upper_bound(grown.begin(), grown.end(), nb), nb);
                    next.push_back(std::move(grown));
                }
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        if (next.empty()) break;
        set.clusters.insert(set.clusters.end(), next.begin(), next.end());
        layer = std::move(next);
    }

    const ClusterIndex index = index_of(set);
    set.subclusters.resize(set.clusters.size());
    for (std::size_t k = 0; k < set.clusters.size(); ++k) {
        for_each_proper_subset(set.clusters[k], [&](const Cluster& sub) {
            const auto it = index.find(sub);
            if (it != index.end()) set.subclusters[k].push_back(it->second);
        });
    }
    return set;
}

void validate_cluster_set(ClusterSet& set, const BathRealization& realization) {
    const Adjacency adj = proximity_graph(realization, set.cutoff);
    for (Cluster& c : set.clusters) {
        if (c.empty()) throw Error("cluster set contains an empty cluster");
        std::sort(c.begin(), c.end());
        if (std::adjacent_find(c.begin(), c.end()) != c.end()) {
            throw Error("cluster set contains duplicate indices");
        }
        if (c.back() >= realization.size()) throw Error("cluster index out of range");
        if (!connected(c, adj)) throw Error("cluster set contains a disconnected cluster");
    }
    const ClusterIndex index = index_of(set);
    if (index.size() != set.clusters.size()) throw Error("cluster set contains duplicate clusters");
    for (std::size_t i = 0; i < realization.size(); ++i) {
        if (!index.count(Cluster{i})) throw Error("cluster set is missing a singleton");
    }
    set.subclusters.assign(set.clusters.size(), {});
    for (std::size_t k = 0; k < set.clusters.size(); ++k) {
        for_each_proper_subset(set.clusters[k], [&](const Cluster& sub) {
            const auto it = index.find(sub);
            if (it != index.end()) {
                set.subclusters[k].push_back(it->second);
            } else if (connected(sub, adj)) {
                throw Error("cluster set is missing a subcluster");
            }
        });
    }
}

TransitionLines transition_lines(std::span<const std::size_t> cluster,
                                 const BathRealization& realization,
                                 const EffectiveParams& params, const TermMask& mask) {
    if (!(realization.A_bar > 0.0)) throw Error("realization has no mean hyperfine coupling");
    const HermitianOperator h = cluster_hamiltonian(cluster, realization, params, mask);
    const HermitianOperator b = total_bath_operator(cluster, realization);
    const Eigensystem eig = eigh(h);
    const double inv_abar = 1.0 / realization.A_bar;
    // Overhauser operator in the eigenbasis, in units of A_bar.
    const ComplexMatrix bt = eig.vectors.adjoint() * (b.matrix() * inv_abar) * eig.vectors;
    const Eigen::Index d = bt.rows();
    const double inv_d = 1.0 / static_cast<double>(d);

    TransitionLines lines;
    for (Eigen::Index m = 0; m < d; ++m) lines.static_part += std::norm(bt(m, m)) * inv_d;
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = m + 1; n < d; ++n) {
            const double w_mn = std::norm(bt(m, n)) * inv_d;
            const double w_nm = std::norm(bt(n, m)) * inv_d;
            lines.static_part += w_mn + w_nm;
            if (w_mn == 0.0 && w_nm == 0.0) continue;
            lines.omega.push_back((eig.values(m) - eig.values(n)) * inv_abar);
            lines.sym.push_back(w_mn + w_nm);
            lines.asym.push_back(w_mn - w_nm);
        }
    }
    return lines;
}

CorrelationTrace cluster_correlation(std::span<const std::size_t> cluster,
                                     const BathRealization& realization,
                                     const EffectiveParams& params, const TermMask& mask,
                                     const TimeGrid& grid) {
    grid.validate();
    const TransitionLines lines = transition_lines(cluster, realization, params, mask);
    std::vector<double> re(grid.samples, 0.0), im(grid.samples, 0.0);
    accumulate_lines(lines, 1.0, grid, re, im);
    CorrelationTrace trace;
    trace.static_part = lines.static_part;
    trace.dynamic.resize(grid.samples);
    for (std::size_t j = 0; j < grid.samples; ++j) trace.dynamic[j] = {re[j], im[j]};
    return trace;
}

std::vector<double> CorrelationSeries::values() const {
    std::vector<double> v(dynamic.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = c0 + dynamic[j];
    return v;
}

CorrelationSeries cce_combine(std::span<const CorrelationTrace> traces, ClusterSet set,
                              const BathRealization& realization, const TimeGrid& grid) {
    grid.validate();
    if (traces.size() != set.clusters.size()) {
        throw Error("cce_combine: one trace per cluster is required");
    }
    validate_cluster_set(set, realization);
    for (const CorrelationTrace& t : traces) {
        if (t.dynamic.size() != grid.samples) throw Error("cce_combine: traces are not on the grid");
    }

    std::vector<std::size_t> order(set.clusters.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return set.clusters[a].size() < set.clusters[b].size();
    });

    // Irreducible contributions, memoized bottom-up.
    std::vector<CorrelationTrace> tilde(set.clusters.size());
    for (std::size_t k : order) {
        CorrelationTrace t = traces[k];
        for (std::size_t sub : set.subclusters[k]) {
            t.static_part -= tilde[sub].static_part;
            for (std::size_t j = 0; j < grid.samples; ++j) t.dynamic[j] -= tilde[sub].dynamic[j];
        }
        tilde[k] = std::move(t);
    }

    int order_max = 0;
    for (const Cluster& c : set.clusters) order_max = std::max(order_max, static_cast<int>(c.size()));
    CorrelationSeries s = make_series(realization, grid, order_max, TermMask::full());
    std::vector<double> im(grid.samples, 0.0);
    for (std::size_t k : order) {
        s.c0 += tilde[k].static_part;
        for (std::size_t j = 0; j < grid.samples; ++j) {
            s.dynamic[j] += tilde[k].dynamic[j].real();
            im[j] += tilde[k].dynamic[j].imag();
        }
    }
    s.max_imag = max_abs(im);
    return s;
}

std::vector<double> cce_coefficients(const ClusterSet& set) {
    const std::size_t n = set.clusters.size();
    if (set.subclusters.size() != n) throw Error("cluster set has no subcluster links");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return set.clusters[a].size() > set.clusters[b].size();
    });
    std::vector<double> coef(n, 0.0), above(n, 0.0);
    for (std::size_t k : order) {
        coef[k] = 1.0 - above[k];
        for (std::size_t sub : set.subclusters[k]) above[sub] += coef[k];
    }
    return coef;
}

CorrelationSeries cce_correlation(const BathRealization& realization, const ClusterSet& set,
                                  const EffectiveParams& params, const TermMask& mask,
                                  const TimeGrid& grid) {
    grid.validate();
    if (realization.size() == 0) throw Error("no spinful sites");
    const std::vector<double> coef = cce_coefficients(set);
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < coef.size(); ++k) {
        if (coef[k] != 0.0) active.push_back(k);
    }

    constexpr std::size_t kChunk = 128;
    constexpr std::size_t kChunksPerBatch = 32;
    const std::size_t T = grid.samples;
    const std::size_t chunks = (active.size() + kChunk - 1) / kChunk;

    CorrelationSeries s = make_series(realization, grid, set.max_order, mask);
    std::vector<double> im(T, 0.0);
    std::vector<double> chunk_static(chunks, 0.0);

    for (std::size_t batch = 0; batch < chunks; batch += kChunksPerBatch) {
        const std::size_t nb = std::min(kChunksPerBatch, chunks - batch);
        std::vector<std::vector<double>> re_buf(nb, std::vector<double>(T, 0.0));
        std::vector<std::vector<double>> im_buf(nb, std::vector<double>(T, 0.0));
        std::vector<std::string> failures(nb);
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(nb); ++q) {
            const std::size_t chunk = batch + static_cast<std::size_t>(q);
            const std::size_t lo = chunk * kChunk;
            const std::size_t hi = std::min(active.size(), lo + kChunk);
            try {
                for (std::size_t a = lo; a < hi; ++a) {
                    const std::size_t k = active[a];
                    const TransitionLines lines =
                        transition_lines(set.clusters[k], realization, params, mask);
                    chunk_static[chunk] += coef[k] * lines.static_part;
                    accumulate_lines(lines, coef[k], grid, re_buf[q], im_buf[q]);
                }
            } catch (const std::exception& e) {
                failures[q] = e.what();
            }
        }
        for (std::size_t q = 0; q < nb; ++q) {
            if (!failures[q].empty()) throw Error(failures[q]);
            for (std::size_t j = 0; j < T; ++j) {
                s.dynamic[j] += re_buf[q][j];
                im[j] += im_buf[q][j];
            }
        }
    }
    for (double c : chunk_static) s.c0 += c;
    s.max_imag = max_abs(im);
    return s;
}

CorrelationSeries exact_bath_correlation(const BathRealization& realization,
                                         const EffectiveParams& params, const TermMask& mask,
                                         const TimeGrid& grid) {
    grid.validate();
    const std::size_t n = realization.size();
    if (n == 0) throw Error("no spinful sites");
    const std::size_t d = static_cast<std::size_t>(realization.species.local_dim());
    std::size_t dim = 1;
    for (std::size_t k = 0; k < n; ++k) {
        dim *= d;
        if (dim > kExactDimensionCap) {
            throw Error("exact evaluation exceeds the Hilbert-space cap of 4096 states");
        }
    }
    Cluster all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const TransitionLines lines = transition_lines(all, realization, params, mask);
    CorrelationSeries s = make_series(realization, grid, 0, mask);
    std::vector<double> im(grid.samples, 0.0);
    accumulate_lines(lines, 1.0, grid, s.dynamic, im);
    s.c0 = lines.static_part;
    s.max_imag = max_abs(im);
    return s;
}

}  // namespace spinbeat
