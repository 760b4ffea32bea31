// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <limits>
#include <queue>
#include <vector>

namespace bld {

/// Dinic max-flow on a small dense-ish graph; used for the pairwise label
/// relabeling subproblems.
class MaxFlow {
public:
    explicit MaxFlow(int n) : graph_(n) {}

    void add_edge(int u, int v, double cap, double rev_cap = 0.0) {
        graph_[u].push_back({v, cap, static_cast<int>(graph_[v].size())});
        graph_[v].push_back({u, rev_cap, static_cast<int>(graph_[u].size()) - 1});
    }

    double run(int s, int t) {
        double flow = 0.0;
        while (bfs(s, t)) {
            iter_.assign(graph_.size(), 0);
            double f;
            while ((f = dfs(s, t, std::numeric_limits<double>::infinity())) > 0.0) flow += f;
        }
        return flow;
    }

    /// Nodes reachable from s in the residual graph (call after run()).
    std::vector<bool> source_side(int s) const {
        std::vector<bool> vis(graph_.size(), false);
        std::queue<int> q;
        q.push(s);
        vis[s] = true;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (const auto& e : graph_[u])
                if (e.cap > 1e-12 && !vis[e.to]) {
                    vis[e.to] = true;
                    q.push(e.to);
                }
        }
        return vis;
    }

private:
    struct Edge {
        int to;
        double cap;
        int rev;
    };

    bool bfs(int s, int t) {
        level_.assign(graph_.size(), -1);
        std::queue<int> q;
        level_[s] = 0;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (const auto& e : graph_[u])
                if (e.cap > 1e-12 && level_[e.to] < 0) {
                    level_[e.to] = level_[u] + 1;
                    q.push(e.to);
                }
        }
        return level_[t] >= 0;
    }

    double dfs(int u, int t, double f) {
        if (u == t) return f;
        for (int& i = iter_[u]; i < static_cast<int>(graph_[u].size()); ++i) {
            Edge& e = graph_[u][i];
            if (e.cap > 1e-12 && level_[e.to] == level_[u] + 1) {
                double d = dfs(e.to, t, std::min(f, e.cap));
                if (d > 0.0) {
                    e.cap -= d;
                    graph_[e.to][e.rev].cap += d;
                    return d;
                }
            }
        }
        return 0.0;
    }

    std::vector<std::vector<Edge>> graph_;
    std::vector<int> level_;
    std::vector<int> iter_;
};

} // namespace bld
