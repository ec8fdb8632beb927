#include "mrps/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mrps {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CostModel CostModel::build(const WarehouseMap& map, const TypeDistribution& distribution) {
    distribution.validate();
    if (int(map.stations.size()) != distribution.n_p)
        throw ConfigError("distribution has " + std::to_string(distribution.n_p) +
                          " station rows, map has " + std::to_string(map.stations.size()));
    if (distribution.n_c > int(map.bins.size()))
        throw ConfigError("more parcel types than bins");
    std::vector<double> d(size_t(distribution.n_p) * map.bins.size());
    for (int k = 0; k < distribution.n_p; k++)
        for (size_t i = 0; i < map.bins.size(); i++) {
            int v = map.station_bin_distance(k, int(i));
            if (v < 0) throw ConfigError("bin " + std::to_string(i) + " unreachable from station " + std::to_string(k));
            d[size_t(k) * map.bins.size() + i] = v;
        }
    return from_matrices(distribution.n_p, int(map.bins.size()), distribution.n_c,
                         std::move(d), distribution.m);
}

CostModel CostModel::from_matrices(int n_p, int n_b, int n_c,
                                   std::vector<double> dist, std::vector<double> m) {
    CostModel cm;
    cm.n_p = n_p;
    cm.n_b = n_b;
    cm.n_c = n_c;
    cm.dist = std::move(dist);
    cm.m = std::move(m);
    cm.w.assign(size_t(n_b) * n_c, 0.0);
    for (int i = 0; i < n_b; i++)
        for (int j = 0; j < n_c; j++) {
            double s = 0;
            for (int k = 0; k < n_p; k++) s += cm.m_at(k, j) * cm.dist_at(k, i);
            cm.w[size_t(i) * n_c + j] = s;
        }
    cm.validate();
    return cm;
}

void CostModel::validate() const {
    if (n_p <= 0 || n_b <= 0 || n_c <= 0) throw ConfigError("cost model dimensions must be positive");
    if (n_c > n_b) throw ConfigError("more parcel types than bins");
    if (dist.size() != size_t(n_p) * n_b || m.size() != size_t(n_p) * n_c || w.size() != size_t(n_b) * n_c)
        throw ConfigError("cost model matrix size mismatch");
    for (double v : dist)
        if (!(v >= 0) || !std::isfinite(v)) throw ConfigError("distances must be finite and nonnegative");
    for (double v : w)
        if (!(v >= 0) || !std::isfinite(v)) throw ConfigError("weights must be finite and nonnegative");
}

void BinAssignment::validate(int n_c) const {
    std::vector<char> seen(size_t(n_c) + 1, 0);
    for (int t : types) {
        if (t < 1 || t > n_c) throw ConfigError("type " + std::to_string(t) + " out of range");
        seen[size_t(t)] = 1;
    }
    for (int j = 1; j <= n_c; j++)
        if (!seen[size_t(j)])
            throw ConfigError("assignment not surjective: type " + std::to_string(j) + " unused");
}

namespace {

// total cost without the 1/n_p factor
double raw_cost(const std::vector<int>& types, const CostModel& cm, std::vector<double>& dmin) {
    double total = 0;
    for (int k = 0; k < cm.n_p; k++) {
        dmin.assign(size_t(cm.n_c) + 1, kInf);
        for (int i = 0; i < cm.n_b; i++) {
            double d = cm.dist_at(k, i);
            int t = types[size_t(i)];
            if (d < dmin[size_t(t)]) dmin[size_t(t)] = d;
        }
        for (int j = 1; j <= cm.n_c; j++) total += cm.m_at(k, j - 1) * dmin[size_t(j)];
    }
    return total;
}

// O(n^2 m) potentials method; rows <= cols; cost(i,j) callable; returns per-row column
template <typename CostFn>
std::vector<int> min_cost_matching(int nrows, int ncols, CostFn cost) {
    std::vector<double> u(size_t(nrows) + 1, 0), v(size_t(ncols) + 1, 0);
    std::vector<int> p(size_t(ncols) + 1, 0), way(size_t(ncols) + 1, 0);
    for (int i = 1; i <= nrows; i++) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(size_t(ncols) + 1, kInf);
        std::vector<char> used(size_t(ncols) + 1, 0);
        do {
            used[size_t(j0)] = 1;
            int i0 = p[size_t(j0)], j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= ncols; j++)
                if (!used[size_t(j)]) {
                    double cur = cost(i0 - 1, j - 1) - u[size_t(i0)] - v[size_t(j)];
                    if (cur < minv[size_t(j)]) { minv[size_t(j)] = cur; way[size_t(j)] = j0; }
                    if (minv[size_t(j)] < delta) { delta = minv[size_t(j)]; j1 = j; }
                }
            for (int j = 0; j <= ncols; j++) {
                if (used[size_t(j)]) { u[size_t(p[size_t(j)])] += delta; v[size_t(j)] -= delta; }
                else minv[size_t(j)] -= delta;
            }
            j0 = j1;
        } while (p[size_t(j0)] != 0);
        do {
            int j1 = way[size_t(j0)];
            p[size_t(j0)] = p[size_t(j1)];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(size_t(nrows), -1);
    for (int j = 1; j <= ncols; j++)
        if (p[size_t(j)] != 0) row_to_col[size_t(p[size_t(j)] - 1)] = j - 1;
    return row_to_col;
}

} // namespace

double average_cost(const BinAssignment& assignment, const CostModel& cost) {
    if (int(assignment.types.size()) != cost.n_b)
        throw ConfigError("assignment length does not match bin count");
    assignment.validate(cost.n_c);
    std::vector<double> dmin;
    return raw_cost(assignment.types, cost, dmin) / cost.n_p;
}

BinAssignment assign_random(int n_b, int n_c, uint64_t seed) {
    if (n_c > n_b || n_c < 1) throw ConfigError("need 1 <= n_c <= n_b");
    Rng rng(seed);
    std::vector<int> order(size_t(n_b), 0);
    for (int i = 0; i < n_b; i++) order[size_t(i)] = i;
    rng.shuffle(order);
    BinAssignment a;
    a.types.assign(size_t(n_b), 0);
    for (int j = 1; j <= n_c; j++) a.types[size_t(order[size_t(j - 1)])] = j;
    for (int i = n_c; i < n_b; i++) a.types[size_t(order[size_t(i)])] = rng.range(1, n_c);
    return a;
}

BinAssignment assign_hungarian(const CostModel& cost) {
    if (cost.n_b != cost.n_c)
        throw ConfigError("hungarian handles the n_b == n_c case only; use greedy, ga or exact");
    auto type_to_bin = min_cost_matching(cost.n_c, cost.n_b,
                                         [&](int j, int i) { return cost.w_at(i, j); });
    BinAssignment a;
    a.types.assign(size_t(cost.n_b), 0);
    for (int j = 0; j < cost.n_c; j++) a.types[size_t(type_to_bin[size_t(j)])] = j + 1;
    return a;
}

BinAssignment assign_greedy(const CostModel& cost, uint64_t seed) {
    const int n_b = cost.n_b, n_c = cost.n_c, n_p = cost.n_p;
    auto type_to_bin = min_cost_matching(n_c, n_b, [&](int j, int i) { return cost.w_at(i, j); });

    std::vector<int> types(size_t(n_b), 0);
    for (int j = 0; j < n_c; j++) types[size_t(type_to_bin[size_t(j)])] = j + 1;

    // d[k][j]: current best distance for type j from station k
    std::vector<double> d(size_t(n_p) * n_c, kInf);
    for (int k = 0; k < n_p; k++)
        for (int j = 0; j < n_c; j++)
            d[size_t(k) * n_c + j] = cost.dist_at(k, type_to_bin[size_t(j)]);

    std::vector<double> type_cost(size_t(n_c), 0);
    for (int j = 0; j < n_c; j++) {
        double s = 0;
        for (int k = 0; k < n_p; k++) s += cost.m_at(k, j) * d[size_t(k) * n_c + j];
        type_cost[size_t(j)] = s;
    }
    double total = 0;
    for (double s : type_cost) total += s;

    std::vector<int> unallocated;
    for (int i = 0; i < n_b; i++)
        if (types[size_t(i)] == 0) unallocated.push_back(i);

    Rng rng(seed);
    while (!unallocated.empty()) {
        int cb = 0;
        for (int j = 1; j < n_c; j++)
            if (type_cost[size_t(j)] > type_cost[size_t(cb)]) cb = j;

        double best_new = kInf;
        size_t best_pos = 0;
        for (size_t pos = 0; pos < unallocated.size(); pos++) {
            int b = unallocated[pos];
            double s = 0;
            for (int k = 0; k < n_p; k++)
                s += cost.m_at(k, cb) * std::min(d[size_t(k) * n_c + cb], cost.dist_at(k, b));
            if (s < best_new) { best_new = s; best_pos = pos; }
        }
        double new_total = total - type_cost[size_t(cb)] + best_new;
        if (new_total < total) {
            int b = unallocated[best_pos];
            types[size_t(b)] = cb + 1;
            for (int k = 0; k < n_p; k++) {
                double& cur = d[size_t(k) * n_c + cb];
                cur = std::min(cur, cost.dist_at(k, b));
            }
            type_cost[size_t(cb)] = best_new;
            total = new_total;
            unallocated.erase(unallocated.begin() + long(best_pos));
        } else {
            for (int b : unallocated) types[size_t(b)] = rng.range(1, n_c);
            unallocated.clear();
        }
    }
    BinAssignment a;
    a.types = std::move(types);
    a.validate(n_c);
    return a;
}

namespace {

// put every missing type at the bin where it costs least, only displacing
// duplicated types
void repair(std::vector<int>& types, const CostModel& cm) {
    std::vector<int> count(size_t(cm.n_c) + 1, 0);
    for (int t : types) count[size_t(t)]++;
    for (int j = 1; j <= cm.n_c; j++) {
        if (count[size_t(j)] > 0) continue;
        int best_bin = -1;
        double best_w = kInf;
        for (int i = 0; i < cm.n_b; i++) {
            if (count[size_t(types[size_t(i)])] < 2) continue;
            double v = cm.w_at(i, j - 1);
            if (v < best_w) { best_w = v; best_bin = i; }
        }
        count[size_t(types[size_t(best_bin)])]--;
        types[size_t(best_bin)] = j;
        count[size_t(j)]++;
    }
}

std::vector<int> pmx_crossover(const std::vector<int>& p1, const std::vector<int>& p2,
                               const CostModel& cm, Rng& rng) {
    int n = int(p1.size());
    int a = rng.range(0, n - 1), b = rng.range(0, n - 1);
    if (a > b) std::swap(a, b);
    std::vector<int> child = p1;
    for (int i = a; i <= b; i++) child[size_t(i)] = p2[size_t(i)];
    repair(child, cm);
    return child;
}

} // namespace

BinAssignment assign_genetic(const CostModel& cost, const GAParams& params, uint64_t seed) {
    if (params.iterations < 1 || params.population < 2 || params.mutation_rate < 0 ||
        params.mutation_rate > 1)
        throw ConfigError("bad GA parameters");
    const int pop_size = params.population;
    Rng rng(seed);
    std::vector<double> scratch;

    auto eval = [&](const std::vector<int>& g) { return raw_cost(g, cost, scratch); };

    std::vector<std::vector<int>> pop;
    pop.reserve(size_t(pop_size));
    int n_greedy = int(std::ceil(0.2 * pop_size));
    for (int s = 0; s < n_greedy; s++) {
        auto g = assign_greedy(cost, rng.next_u64()).types;
        g[size_t(rng.range(0, cost.n_b - 1))] = rng.range(1, cost.n_c);
        repair(g, cost);
        pop.push_back(std::move(g));
    }
    while (int(pop.size()) < pop_size)
        pop.push_back(assign_random(cost.n_b, cost.n_c, rng.next_u64()).types);

    std::vector<double> costs(size_t(pop_size), 0.0);
    for (int i = 0; i < pop_size; i++) costs[size_t(i)] = eval(pop[size_t(i)]);

    std::vector<int> best;
    double best_cost = kInf;
    auto track_best = [&]() {
        for (int i = 0; i < pop_size; i++)
            if (costs[size_t(i)] < best_cost) {
                best_cost = costs[size_t(i)];
                best = pop[size_t(i)];
            }
    };
    track_best();

    auto tournament = [&]() -> const std::vector<int>& {
        int a = rng.range(0, pop_size - 1), b = rng.range(0, pop_size - 1);
        return costs[size_t(a)] <= costs[size_t(b)] ? pop[size_t(a)] : pop[size_t(b)];
    };

    for (int gen = 0; gen < params.iterations; gen++) {
        std::vector<std::vector<int>> next;
        next.reserve(size_t(pop_size));
        next.push_back(best); // elite
        while (int(next.size()) < pop_size) {
            auto child = pmx_crossover(tournament(), tournament(), cost, rng);
            if (rng.uniform01() < params.mutation_rate) {
                child[size_t(rng.range(0, cost.n_b - 1))] = rng.range(1, cost.n_c);
                repair(child, cost);
            }
            next.push_back(std::move(child));
        }
        pop = std::move(next);
        for (int i = 0; i < pop_size; i++) costs[size_t(i)] = eval(pop[size_t(i)]);
        track_best();
    }
    BinAssignment a;
    a.types = std::move(best);
    a.validate(cost.n_c);
    return a;
}

ExactResult assign_exact(const CostModel& cost, double time_limit_seconds) {
    const int n_b = cost.n_b, n_c = cost.n_c, n_p = cost.n_p;
    // the limit is enforced as a node budget at a pinned rate so that
    // limit-hit solves still reproduce bit-for-bit under machine load
    constexpr double kNodesPerSecond = 5e6;
    const uint64_t node_budget =
        time_limit_seconds > 0 ? uint64_t(time_limit_seconds * kNodesPerSecond) : ~uint64_t(0);

    // bins in descending spread of w make conflicts surface early
    std::vector<int> order(size_t(n_b), 0);
    for (int i = 0; i < n_b; i++) order[size_t(i)] = i;
    std::vector<double> spread(size_t(n_b), 0.0);
    for (int i = 0; i < n_b; i++) {
        double lo = kInf, hi = -kInf;
        for (int j = 0; j < n_c; j++) {
            lo = std::min(lo, cost.w_at(i, j));
            hi = std::max(hi, cost.w_at(i, j));
        }
        spread[size_t(i)] = hi - lo;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return spread[size_t(a)] > spread[size_t(b)]; });

    // suffix_min[k][pos]: best distance from station k among bins not yet fixed
    std::vector<double> suffix_min(size_t(n_p) * (n_b + 1), kInf);
    for (int pos = n_b - 1; pos >= 0; pos--)
        for (int k = 0; k < n_p; k++) {
            double v = cost.dist_at(k, order[size_t(pos)]);
            suffix_min[size_t(k) * (n_b + 1) + pos] =
                std::min(suffix_min[size_t(k) * (n_b + 1) + pos + 1], v);
        }

    auto incumbent = assign_greedy(cost, 0x9d2c5680u);
    std::vector<double> scratch;
    double ub = raw_cost(incumbent.types, cost, scratch);
    std::vector<int> best = incumbent.types;
    bool completed = true;

    // assigned_min[k][j]: best distance among bins currently fixed to type j
    std::vector<double> assigned_min(size_t(n_p) * n_c, kInf);
    std::vector<int> type_count(size_t(n_c) + 1, 0);
    std::vector<int> types(size_t(n_b), 0);
    int missing = n_c;

    auto lower_bound = [&](int depth) {
        double lb = 0;
        for (int k = 0; k < n_p; k++) {
            double u = suffix_min[size_t(k) * (n_b + 1) + depth];
            const double* am = &assigned_min[size_t(k) * n_c];
            for (int j = 0; j < n_c; j++) lb += cost.m_at(k, j) * std::min(am[j], u);
        }
        return lb;
    };

    uint64_t nodes = 0;
    // iterative DFS with explicit child order per depth
    struct Frame { int next_choice; };
    std::vector<std::vector<int>> child_order(static_cast<size_t>(n_b));
    for (int pos = 0; pos < n_b; pos++) {
        int bin = order[size_t(pos)];
        std::vector<int> ts(size_t(n_c), 0);
        for (int j = 0; j < n_c; j++) ts[size_t(j)] = j + 1;
        std::stable_sort(ts.begin(), ts.end(), [&](int a, int b) {
            return cost.w_at(bin, a - 1) < cost.w_at(bin, b - 1);
        });
        child_order[size_t(pos)] = std::move(ts);
    }

    std::vector<Frame> stack;
    stack.push_back({0});
    while (!stack.empty()) {
        if (++nodes > node_budget) { completed = false; break; }
        int depth = int(stack.size()) - 1;
        Frame& f = stack.back();

        if (f.next_choice > 0) { // undo previous child of this frame
            int bin = order[size_t(depth)];
            int t = child_order[size_t(depth)][size_t(f.next_choice - 1)];
            if (--type_count[size_t(t)] == 0) missing++;
            types[size_t(bin)] = 0;
            for (int k = 0; k < n_p; k++) {
                double& am = assigned_min[size_t(k) * n_c + (t - 1)];
                am = kInf; // recompute from scratch for this type
                for (int i = 0; i < n_b; i++)
                    if (types[size_t(i)] == t) am = std::min(am, cost.dist_at(k, i));
            }
        }
        if (f.next_choice >= n_c) { stack.pop_back(); continue; }
        int bin = order[size_t(depth)];
        int t = child_order[size_t(depth)][size_t(f.next_choice)];
        f.next_choice++;

        // apply
        types[size_t(bin)] = t;
        if (type_count[size_t(t)]++ == 0) missing--;
        for (int k = 0; k < n_p; k++) {
            double& am = assigned_min[size_t(k) * n_c + (t - 1)];
            am = std::min(am, cost.dist_at(k, bin));
        }

        int next_depth = depth + 1;
        bool feasible = (n_b - next_depth) >= missing;
        if (feasible) {
            if (next_depth == n_b) {
                double c = lower_bound(next_depth); // exact at full depth
                if (c < ub) { ub = c; best = types; }
            } else if (lower_bound(next_depth) < ub) {
                stack.push_back({0});
                continue;
            }
        }
        // child rejected: fall through; the undo happens on the next loop pass
    }

    ExactResult res;
    res.assignment.types = std::move(best);
    res.assignment.validate(n_c);
    res.optimal = completed;
    res.cost = ub / n_p;
    return res;
}

} // namespace mrps
