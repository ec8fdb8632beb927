#pragma once
#include <cstdint>
#include <vector>

#include "mrps/gridworld.hpp"

namespace mrps {

// Station->bin travel costs and the per-(bin,type) weights derived from a
// parcel-type distribution.
struct CostModel {
    int n_p = 0, n_b = 0, n_c = 0;
    std::vector<double> dist; // n_p x n_b
    std::vector<double> m;    // n_p x n_c
    std::vector<double> w;    // n_b x n_c, w[i][j] = sum_k m[k][j] * dist[k][i]

    double dist_at(int k, int i) const { return dist[size_t(k) * n_b + size_t(i)]; }
    double m_at(int k, int j) const { return m[size_t(k) * n_c + size_t(j)]; }
    double w_at(int i, int j) const { return w[size_t(i) * n_c + size_t(j)]; }

    static CostModel build(const WarehouseMap& map, const TypeDistribution& dist);
    static CostModel from_matrices(int n_p, int n_b, int n_c,
                                   std::vector<double> dist, std::vector<double> m);
    void validate() const;
};

// types[i] in [1, n_c]: the parcel type bin i collects; every type appears at least once
struct BinAssignment {
    std::vector<int> types;
    void validate(int n_c) const;
};

// Average expected travel cost: (1/n_p) * sum_k sum_j m[k][j] * min over bins of
// type j of dist(k, i)
double average_cost(const BinAssignment& assignment, const CostModel& cost);

BinAssignment assign_random(int n_b, int n_c, uint64_t seed);

// requires n_b == n_c (bijection case)
BinAssignment assign_hungarian(const CostModel& cost);

// seed only feeds the terminal randomly-assign-the-rest branch
BinAssignment assign_greedy(const CostModel& cost, uint64_t seed = 0);

struct GAParams {
    int iterations = 800;
    int population = 100;
    double mutation_rate = 0.08;
};

BinAssignment assign_genetic(const CostModel& cost, const GAParams& params, uint64_t seed);

struct ExactResult {
    BinAssignment assignment;
    bool optimal = false;
    double cost = 0;
};

// branch and bound; time_limit_seconds <= 0 means unlimited
ExactResult assign_exact(const CostModel& cost, double time_limit_seconds = 0);

} // namespace mrps
