#pragma once

#include <random>
#include <vector>

#include "aqia/agent.hpp"
#include "aqia/kernels.hpp"

namespace testing {

inline aqia::AgentParams random_agent(std::mt19937_64& rng, int n, double gamma = -1.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.2, 1.5);
    aqia::AgentParams p;
    p.n = n;
    p.bonds = aqia::chain_bonds(n);
    for (int k = 0; k < n; ++k) p.h.push_back(normal(rng));
    for (std::size_t b = 0; b < p.bonds.size(); ++b) p.J.push_back(normal(rng));
    p.gamma = gamma >= 0.0 ? gamma : unit(rng);
    return p;
}

inline std::vector<aqia::Summary> random_summaries(std::mt19937_64& rng, int N) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<aqia::Summary> m(static_cast<std::size_t>(N));
    for (auto& s : m) s = {unit(rng), unit(rng), -1.0 + 0.5 * unit(rng)};
    return m;
}

inline aqia::EdgeMask random_mask(std::mt19937_64& rng, int N, double p) {
    std::bernoulli_distribution coin(p);
    aqia::EdgeMask m = aqia::EdgeMask::Constant(N, N, false);
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) m(i, j) = m(j, i) = coin(rng);
    return m;
}

}  // namespace testing
