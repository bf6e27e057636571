#pragma once

// Reference implementations the library is checked against. Nothing here
// calls into gridshare beyond its plain data types.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "gridshare/clustering.hpp"
#include "gridshare/lp.hpp"
#include "gridshare/model.hpp"

namespace oracle {

// erf by its Maclaurin series in long double, erfc by a Lentz continued
// fraction further out.
inline long double erf_ld(long double x) {
    const long double ax = std::fabs(x);
    const long double pi = 3.141592653589793238462643383279502884L;
    if (ax <= 3.0L) {
        long double term = ax, sum = ax;
        for (int n = 1; n < 200; ++n) {
            term *= -ax * ax / n;
            const long double add = term / (2 * n + 1);
            sum += add;
            if (std::fabs(add) < 1e-30L) break;
        }
        const long double r = 2.0L / std::sqrt(pi) * sum;
        return x < 0 ? -r : r;
    }
    // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))
    const long double tiny = 1e-300L;
    long double f = ax, c = ax, d = 0.0L;
    for (int k = 1; k < 500; ++k) {
        const long double a = k / 2.0L;
        d = ax + a * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = ax + a / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0L / d;
        const long double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0L) < 1e-20L) break;
    }
    const long double erfc = std::exp(-ax * ax) / std::sqrt(pi) / f;
    return x < 0 ? erfc - 1.0L : 1.0L - erfc;
}

inline double erf(double x) { return static_cast<double>(erf_ld(x)); }

inline double normal_cdf(double z) { return 0.5 * (1.0 + erf(z / std::sqrt(2.0))); }

// Plain Gauss-Jordan with partial pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_dense(std::vector<std::vector<double>> a,
                                                       std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int c = 0; c < n; ++c) {
        int p = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
        if (std::fabs(a[p][c]) < 1e-10) return std::nullopt;
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (int k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

struct VertexResult {
    bool feasible = false;
    double objective = 0.0;
};

// Minimum of c'x over every basic feasible point. Needs finite bounds on
// every variable so the feasible set is a polytope.
inline VertexResult enumerate_vertices(const gridshare::LinearProgram& lp) {
    const int n = lp.variable_count();
    struct Hyperplane {
        std::vector<double> a;
        double b;
    };
    std::vector<Hyperplane> planes;
    std::vector<Hyperplane> forced;
    for (const auto& row : lp.rows) {
        Hyperplane h{std::vector<double>(n, 0.0), row.rhs};
        for (std::size_t k = 0; k < row.index.size(); ++k) h.a[row.index[k]] += row.value[k];
        (row.sense == gridshare::RowSense::Equal ? forced : planes).push_back(h);
    }
    for (int j = 0; j < n; ++j) {
        Hyperplane lo{std::vector<double>(n, 0.0), lp.lower[j]};
        lo.a[j] = 1.0;
        Hyperplane up = lo;
        up.b = lp.upper[j];
        planes.push_back(lo);
        planes.push_back(up);
    }

    auto feasible = [&](const std::vector<double>& x) {
        for (int j = 0; j < n; ++j)
            if (x[j] < lp.lower[j] - 1e-9 || x[j] > lp.upper[j] + 1e-9) return false;
        for (const auto& row : lp.rows) {
            double v = 0.0;
            for (std::size_t k = 0; k < row.index.size(); ++k) v += row.value[k] * x[row.index[k]];
            const double tol = 1e-9 * (1.0 + std::fabs(row.rhs));
            if (row.sense == gridshare::RowSense::LessEqual && v > row.rhs + tol) return false;
            if (row.sense == gridshare::RowSense::GreaterEqual && v < row.rhs - tol) return false;
            if (row.sense == gridshare::RowSense::Equal && std::fabs(v - row.rhs) > tol) return false;
        }
        return true;
    };

    VertexResult best;
    const int free = n - static_cast<int>(forced.size());
    if (free < 0) return best;
    const int m = static_cast<int>(planes.size());
    std::vector<int> pick(static_cast<std::size_t>(free));
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
        std::vector<std::vector<double>> a;
        std::vector<double> b;
        for (const auto& h : forced) a.push_back(h.a), b.push_back(h.b);
        for (int p : pick) a.push_back(planes[p].a), b.push_back(planes[p].b);
        if (auto x = solve_dense(a, b); x && feasible(*x)) {
            double obj = 0.0;
            for (int j = 0; j < n; ++j) obj += lp.cost[j] * (*x)[j];
            if (!best.feasible || obj < best.objective) best = {true, obj};
        }
        // next combination of `free` planes out of m
        int k = free - 1;
        while (k >= 0 && pick[k] == m - free + k) --k;
        if (k < 0) break;
        ++pick[k];
        for (int t = k + 1; t < free; ++t) pick[t] = pick[t - 1] + 1;
    }
    return best;
}

// Best total weight over all spanning trees of the complete graph, with the
// edge set of the first tree reaching it in subset order.
struct TreeResult {
    double weight = -1e300;
    std::vector<std::pair<int, int>> edges;
};

inline TreeResult best_spanning_tree(const gridshare::WeightMatrix& w) {
    const int k = w.size;
    TreeResult best;
    if (k <= 1) {
        best.weight = 0.0;
        return best;
    }
    std::vector<std::pair<int, int>> all;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) all.emplace_back(i, j);
    const int m = static_cast<int>(all.size());
    const int need = k - 1;
    std::vector<int> pick(static_cast<std::size_t>(need));
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
        std::vector<int> comp(static_cast<std::size_t>(k));
        std::iota(comp.begin(), comp.end(), 0);
        bool acyclic = true;
        double total = 0.0;
        for (int p : pick) {
            const auto [i, j] = all[p];
            const int ci = comp[i], cj = comp[j];
            if (ci == cj) {
                acyclic = false;
                break;
            }
            for (int& c : comp)
                if (c == cj) c = ci;
            total += w(i, j);
        }
        if (acyclic && total > best.weight) {
            best.weight = total;
            best.edges.clear();
            for (int p : pick) best.edges.push_back(all[p]);
        }
        int t = need - 1;
        while (t >= 0 && pick[t] == m - need + t) --t;
        if (t < 0) break;
        ++pick[t];
        for (int u = t + 1; u < need; ++u) pick[u] = pick[u - 1] + 1;
    }
    return best;
}

}  // namespace oracle

namespace fixture {

// Stations on a horizontal line, 1 km apart unless positions are given.
inline gridshare::Network line_network(int stations, int slots, std::vector<gridshare::Point> positions = {}) {
    gridshare::Network net;
    net.config.bs_count = stations;
    net.config.slot_count = slots;
    net.config.slot_hours = 1.0;
    for (int i = 0; i < stations; ++i) {
        gridshare::BaseStation bs;
        bs.id = i;
        bs.position = positions.empty() ? gridshare::Point{0.5 + i, 1.0} : positions[static_cast<std::size_t>(i)];
        net.stations.push_back(bs);
    }
    net.prices = gridshare::PriceSchedule::constant(slots, 0.8, 0.2, 0.6, 0.4);
    return net;
}

// NRE table from explicit per-slot means with a shared deviation.
inline gridshare::NreTable table(const std::vector<std::vector<double>>& means, double std = 5.0) {
    gridshare::NreTable t;
    t.stations = static_cast<int>(means.size());
    t.slots = static_cast<int>(means.front().size());
    for (const auto& row : means)
        for (double m : row) t.stats.push_back({m, std});
    t.refresh_averages();
    return t;
}

}  // namespace fixture
